//! OSPA multi-object error and run-level aggregation.

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OspaParams {
    pub order: f64,
    /// Cut-off distance (m).
    pub cutoff: f64,
}

impl Default for OspaParams {
    fn default() -> Self {
        Self {
            order: 1.0,
            cutoff: 100.0,
        }
    }
}

impl OspaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.order >= 1.0) {
            return Err(invalid("order", format!("must be at least 1, got {}", self.order)));
        }
        if !(self.cutoff > 0.0) {
            return Err(invalid("cutoff", format!("must be positive, got {}", self.cutoff)));
        }
        Ok(())
    }
}

/// OSPA distance with its localization and cardinality parts;
/// `total^p = localization^p + cardinality^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ospa {
    pub total: f64,
    pub localization: f64,
    pub cardinality: f64,
}

/// Minimum-cost assignment of every row to a distinct column
/// (`rows <= cols`). Returns the column of each row and the total cost.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // potentials and matching with 1-based sentinel column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=m {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    let total = col_of.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (col_of, total)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// OSPA between planar point sets. Two empty sets are at distance zero.
pub fn ospa(x: &[[f64; 2]], y: &[[f64; 2]], params: &OspaParams) -> Result<Ospa> {
    params.validate()?;
    // equal sizes are ordered canonically so that swapping arguments gives
    // bit-identical results
    let x_first = match x.len().cmp(&y.len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            let key = |s: &[[f64; 2]]| s.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
            key(x) <= key(y)
        }
    };
    let (small, large) = if x_first { (x, y) } else { (y, x) };
    let n = large.len();
    if n == 0 {
        return Ok(Ospa {
            total: 0.0,
            localization: 0.0,
            cardinality: 0.0,
        });
    }
    let (p, c) = (params.order, params.cutoff);
    let cost: Vec<Vec<f64>> = small
        .iter()
        .map(|a| large.iter().map(|b| dist(*a, *b).min(c).powf(p)).collect())
        .collect();
    let (_, loc_sum) = min_cost_assignment(&cost);
    let card_sum = c.powf(p) * (n - small.len()) as f64;
    let nf = n as f64;
    Ok(Ospa {
        total: ((loc_sum + card_sum) / nf).powf(1.0 / p),
        localization: (loc_sum / nf).powf(1.0 / p),
        cardinality: (card_sum / nf).powf(1.0 / p),
    })
}

/// Pointwise summary of several equal-length series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q95: Vec<f64>,
    /// Mean over all steps and runs.
    pub overall_mean: f64,
}

pub fn aggregate_runs(runs: &[Vec<f64>]) -> Result<Aggregate> {
    let first = runs.first().ok_or(Error::EmptyInput("runs"))?;
    let len = first.len();
    if let Some(r) = runs.iter().find(|r| r.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: format!("series of length {len}"),
            actual: r.len().to_string(),
        });
    }
    let mut mean = Vec::with_capacity(len);
    let mut q05 = Vec::with_capacity(len);
    let mut q95 = Vec::with_capacity(len);
    for k in 0..len {
        let column: Vec<f64> = runs.iter().map(|r| r[k]).collect();
        mean.push(column.iter().sum::<f64>() / column.len() as f64);
        let mut data = Data::new(column);
        q05.push(data.quantile(0.05));
        q95.push(data.quantile(0.95));
    }
    let overall_mean = if len == 0 {
        0.0
    } else {
        runs.iter().flatten().sum::<f64>() / (runs.len() * len) as f64
    };
    Ok(Aggregate {
        mean,
        q05,
        q95,
        overall_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn p1() -> OspaParams {
        OspaParams::default()
    }

    /// Minimum over all injections of the smaller set into the larger one.
    fn brute_force(x: &[[f64; 2]], y: &[[f64; 2]], params: &OspaParams) -> f64 {
        let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
        let n = large.len();
        if n == 0 {
            return 0.0;
        }
        fn go(i: usize, small: &[[f64; 2]], large: &[[f64; 2]], used: &mut Vec<bool>, p: &OspaParams) -> f64 {
            if i == small.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..large.len() {
                if !used[j] {
                    used[j] = true;
                    let d = dist(small[i], large[j]).min(p.cutoff).powf(p.order);
                    best = best.min(d + go(i + 1, small, large, used, p));
                    used[j] = false;
                }
            }
            best
        }
        let loc = go(0, small, large, &mut vec![false; n], params);
        let card = params.cutoff.powf(params.order) * (n - small.len()) as f64;
        ((loc + card) / n as f64).powf(1.0 / params.order)
    }

    #[test]
    fn worked_examples() {
        let a = [[0.0, 0.0], [10.0, 0.0]];
        assert_eq!(ospa(&a, &a, &p1()).unwrap().total, 0.0);
        assert_eq!(ospa(&[[0.0, 0.0]], &[], &p1()).unwrap().total, 100.0);
        let o = ospa(&a, &[[0.0, 3.0], [10.0, 4.0]], &p1()).unwrap();
        assert_relative_eq!(o.total, 3.5, max_relative = 1e-15);
        assert_eq!(o.cardinality, 0.0);
        assert_eq!(ospa(&[], &[], &p1()).unwrap().total, 0.0);
    }

    #[test]
    fn components_add_up() {
        let x = [[0.0, 0.0], [50.0, 0.0], [400.0, 400.0]];
        let y = [[3.0, 4.0]];
        let o = ospa(&x, &y, &p1()).unwrap();
        assert_relative_eq!(o.localization, 5.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(o.cardinality, 200.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(o.total, o.localization + o.cardinality, max_relative = 1e-14);
        let p2 = OspaParams {
            order: 2.0,
            cutoff: 100.0,
        };
        let o = ospa(&x, &y, &p2).unwrap();
        assert_relative_eq!(o.total.powi(2), o.localization.powi(2) + o.cardinality.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ospa(&[], &[], &OspaParams { order: 0.5, cutoff: 1.0 }).is_err());
        assert!(ospa(&[], &[], &OspaParams { order: 1.0, cutoff: 0.0 }).is_err());
    }

    fn points(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
        prop::collection::vec(prop::array::uniform2(-150.0f64..150.0), 0..=max)
    }

    proptest! {
        #[test]
        fn assignment_is_optimal(x in points(6), y in points(6), order in 1.0f64..3.0) {
            let params = OspaParams { order, cutoff: 100.0 };
            let fast = ospa(&x, &y, &params).unwrap().total;
            let slow = brute_force(&x, &y, &params);
            prop_assert!((fast - slow).abs() <= 1e-9 * (1.0 + slow));
        }

        #[test]
        fn bounded_and_symmetric(x in points(5), y in points(5)) {
            let a = ospa(&x, &y, &p1()).unwrap().total;
            prop_assert_eq!(a, ospa(&y, &x, &p1()).unwrap().total);
            prop_assert!(a <= 100.0 + 1e-12);
            if x.is_empty() != y.is_empty() {
                prop_assert_eq!(a, 100.0);
            }
        }
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = stream(0, Stream::Custom(9));
        let set = |rng: &mut crate::rng::SimRng| -> Vec<[f64; 2]> {
            let n = rng.random_range(0..5);
            (0..n).map(|_| [rng.random_range(0.0..200.0), rng.random_range(0.0..200.0)]).collect()
        };
        for _ in 0..10_000 {
            let (x, y, z) = (set(&mut rng), set(&mut rng), set(&mut rng));
            let xy = ospa(&x, &y, &p1()).unwrap().total;
            let yz = ospa(&y, &z, &p1()).unwrap().total;
            let xz = ospa(&x, &z, &p1()).unwrap().total;
            assert!(xz <= xy + yz + 1e-9);
        }
    }

    #[test]
    fn aggregate_examples() {
        let one = aggregate_runs(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(one.mean, vec![1.0, 2.0, 3.0]);
        let two = aggregate_runs(&[vec![2.0; 4], vec![6.0; 4]]).unwrap();
        assert_eq!(two.mean, vec![4.0; 4]);
        assert_eq!(two.overall_mean, 4.0);
        assert!(two.q05.iter().zip(&two.q95).all(|(a, b)| a <= b));
        assert!(matches!(aggregate_runs(&[]), Err(Error::EmptyInput(_))));
        assert!(aggregate_runs(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn aggregate_mean_obeys_clt() {
        use rand_distr::{Distribution, Normal};
        let mut rng = stream(4, Stream::Custom(9));
        let d = Normal::new(10.0, 2.0).unwrap();
        let runs: Vec<Vec<f64>> = (0..100).map(|_| vec![d.sample(&mut rng)]).collect();
        let agg = aggregate_runs(&runs).unwrap();
        assert!((agg.mean[0] - 10.0).abs() < 3.0 * 2.0 / 10.0);
        assert!(agg.q05[0] < agg.mean[0] && agg.mean[0] < agg.q95[0]);
    }
}
