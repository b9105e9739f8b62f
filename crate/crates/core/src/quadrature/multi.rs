use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::univariate::{RuleFamily, UnivariateRule};
use crate::error::{Error, Result};
use crate::thermal_block::ParameterPoint;

/// Default cap on the number of nodes a multivariate rule may have.
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// Grid used when merging coincident nodes.
const MERGE_RESOLUTION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "q", rename_all = "kebab-case")]
pub enum MultiKind {
    FullTensor(usize),
    Smolyak(usize),
}

/// Multivariate rule on `[1, 3]^K`. Smolyak weights may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiRule {
    pub k: usize,
    pub kind: MultiKind,
    pub family: RuleFamily,
    pub nodes: Vec<ParameterPoint>,
    pub weights: Vec<f64>,
}

impl MultiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(&ParameterPoint) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(y, &w)| w * g(y)).sum()
    }
}

pub fn integrate(rule: &MultiRule, g: impl Fn(&ParameterPoint) -> f64) -> f64 {
    rule.integrate(g)
}

/// Calls `visit` for every point of `rules[0] × … × rules[K-1]`, last
/// coordinate fastest, with the product weight.
fn for_each_tensor_point(rules: &[&UnivariateRule], mut visit: impl FnMut(&[f64], f64)) {
    let k = rules.len();
    if rules.iter().any(|r| r.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; k];
    loop {
        let mut w = 1.0;
        for d in 0..k {
            point[d] = rules[d].nodes[idx[d]];
            w *= rules[d].weights[idx[d]];
        }
        visit(&point, w);
        let mut d = k;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Full tensor product of the level-`q` rule in every coordinate.
pub fn full_tensor(family: RuleFamily, k: usize, q: usize, budget: usize) -> Result<MultiRule> {
    if k == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let m = family.size(q);
    let requested = m.checked_pow(k as u32).unwrap_or(usize::MAX);
    if requested > budget {
        return Err(Error::NodeBudget { requested, budget });
    }
    let rule = family.rule(q)?;
    let rules = vec![&rule; k];
    let mut nodes = Vec::with_capacity(requested);
    let mut weights = Vec::with_capacity(requested);
    for_each_tensor_point(&rules, |p, w| {
        nodes.push(ParameterPoint::new(p.to_vec()));
        weights.push(w);
    });
    Ok(MultiRule { k, kind: MultiKind::FullTensor(q), family, nodes, weights })
}

/// Multi-indices `α ≥ 1` of length `k` with `Σ (α_i − 1) = excess`.
fn multi_indices(k: usize, excess: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == k {
            cur.push(left + 1);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e + 1);
            rec(k, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, excess, &mut Vec::with_capacity(k), &mut out);
    out
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Smolyak sparse grid of order `q`, realized by the combination technique.
///
/// `q` is the highest univariate level that appears, so the rule is the sum of
/// tensorized differences `⊗ Δ_{α_k}` over `α ≥ 1` with `Σ_k (α_k − 1) ≤ q − 1`.
/// With `ℓ = Σ (α_k − 1)` and `L = q − 1`, the combination weights are
/// `(−1)^{L−ℓ} C(K−1, L−ℓ)` for `L − K + 1 ≤ ℓ ≤ L`. Coincident nodes (to a
/// `1e-14` grid) are merged by summing their weights; zero merged weights are
/// kept so the node set is the union of all tensor grids used.
pub fn smolyak(family: RuleFamily, k: usize, q: usize, budget: usize) -> Result<MultiRule> {
    if k == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if q == 0 {
        return Err(Error::InvalidArgument("Smolyak order must be at least 1".into()));
    }
    let top = q - 1;
    let rules: Vec<UnivariateRule> = (1..=q).map(|l| family.rule(l)).collect::<Result<_>>()?;

    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut nodes: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut raw = 0usize;
    for excess in top.saturating_sub(k - 1)..=top {
        let gap = top - excess;
        let coeff = if gap % 2 == 0 { 1.0 } else { -1.0 } * binomial(k - 1, gap);
        for alpha in multi_indices(k, excess) {
            let tensor: Vec<&UnivariateRule> = alpha.iter().map(|&a| &rules[a - 1]).collect();
            raw += tensor.iter().map(|r| r.len()).product::<usize>();
            if raw > budget.saturating_mul(64) {
                return Err(Error::NodeBudget { requested: raw, budget });
            }
            for_each_tensor_point(&tensor, |p, w| {
                let key: Vec<i64> = p.iter().map(|&x| (x / MERGE_RESOLUTION).round() as i64).collect();
                match index.get(&key) {
                    Some(&i) => weights[i] += coeff * w,
                    None => {
                        index.insert(key, nodes.len());
                        nodes.push(p.to_vec());
                        weights.push(coeff * w);
                    }
                }
            });
        }
    }
    if nodes.len() > budget {
        return Err(Error::NodeBudget { requested: nodes.len(), budget });
    }
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        nodes[a].iter().zip(&nodes[b]).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(MultiRule {
        k,
        kind: MultiKind::Smolyak(q),
        family,
        nodes: order.iter().map(|&i| ParameterPoint::new(nodes[i].clone())).collect(),
        weights: order.iter().map(|&i| weights[i]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: usize = DEFAULT_NODE_BUDGET;

    #[test]
    fn tensor_counts() {
        assert_eq!(full_tensor(RuleFamily::ClenshawCurtis, 2, 6, B).unwrap().len(), 1089);
        assert_eq!(full_tensor(RuleFamily::GaussLegendre, 4, 4, B).unwrap().len(), 256);
        assert_eq!(full_tensor(RuleFamily::GaussLegendre, 9, 2, B).unwrap().len(), 512);
        assert!(matches!(
            full_tensor(RuleFamily::GaussLegendre, 9, 3, 10_000),
            Err(Error::NodeBudget { requested: 19683, .. })
        ));
    }

    #[test]
    fn smolyak_counts() {
        assert_eq!(smolyak(RuleFamily::ClenshawCurtis, 2, 6, B).unwrap().len(), 145);
        let gj = RuleFamily::GaussJacobi { alpha: 10.0, beta: 10.0 };
        assert_eq!(smolyak(gj, 9, 3, B).unwrap().len(), 181);
        assert_eq!(smolyak(RuleFamily::GaussLegendre, 9, 3, B).unwrap().len(), 181);
    }

    #[test]
    fn smolyak_in_one_dimension_is_univariate() {
        for family in [RuleFamily::ClenshawCurtis, RuleFamily::GaussLegendre] {
            for q in 1..6 {
                let s = smolyak(family, 1, q, B).unwrap();
                let u = family.rule(q).unwrap();
                assert_eq!(s.nodes.iter().map(|p| p.coords()[0]).collect::<Vec<_>>(), u.nodes);
                assert_eq!(s.weights, u.weights);
            }
        }
    }

    #[test]
    fn separable_integrand() {
        let s = smolyak(RuleFamily::GaussLegendre, 2, 4, B).unwrap();
        let v = s.integrate(|y| y.coords().iter().product());
        assert!((v - 16.0).abs() < 1e-12);
        let t = full_tensor(RuleFamily::GaussLegendre, 3, 2, B).unwrap();
        assert!((t.integrate(|_| 1.0) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![3, 1], vec![2, 2], vec![1, 3]]);
        assert_eq!(multi_indices(3, 0), vec![vec![1, 1, 1]]);
        assert_eq!(multi_indices(9, 2).len(), 45);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(smolyak(RuleFamily::GaussLegendre, 2, 0, B).is_err());
        assert!(full_tensor(RuleFamily::GaussLegendre, 0, 2, B).is_err());
    }
}
