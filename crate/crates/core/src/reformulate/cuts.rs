//! Valid inequalities for the reformulations.

use crate::model::{ConeKind, ConeTag, Cut, CutTag, LinRow, Sense};
use crate::samples::SampleSet;

/// `sigma = N epsilon` and `d_jk = sum_{i=j+1..k} (xi_i - xi_{k+1})` for a list of pairs.
///
/// The set function `h(S) = sqrt(sigma + sum_{s in S} d_s)` is submodular.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularCoeffs {
    pub sigma: f64,
    pub pairs: Vec<(usize, usize)>,
    pub d: Vec<f64>,
}

impl SubmodularCoeffs {
    /// Coefficients for the given `(j, k)` pairs, `0 <= j <= k < N`.
    pub fn for_pairs(samples: &SampleSet, pairs: Vec<(usize, usize)>) -> Self {
        let xi = samples.values();
        let n = xi.len();
        // prefix[i] = xi_1 + .. + xi_i
        let mut prefix = vec![0.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + xi[i];
        }
        let d = pairs
            .iter()
            .map(|&(j, k)| {
                if k <= j {
                    return 0.0;
                }
                let next = if k < n { xi[k] } else { xi[n - 1] };
                // sum of differences, never negative because xi is sorted
                (prefix[k] - prefix[j] - (k - j) as f64 * next).max(0.0)
            })
            .collect();
        SubmodularCoeffs { sigma: n as f64 * samples.epsilon(), pairs, d }
    }

    /// All pairs `0 <= j <= k <= N - 1`.
    pub fn full(samples: &SampleSet) -> Self {
        let n = samples.len();
        let pairs = (0..n).flat_map(|k| (0..=k).map(move |j| (j, k))).collect();
        Self::for_pairs(samples, pairs)
    }

    pub fn h(&self, selected: impl IntoIterator<Item = usize>) -> f64 {
        (self.sigma + selected.into_iter().map(|i| self.d[i]).sum::<f64>()).sqrt()
    }
}

/// Greedy extended-polymatroid cut `pi . o <= tau`, returned only when `o_hat, tau_hat` violates it.
///
/// Pairs are visited by decreasing `o_hat`, ties by ascending index, and
/// `pi` takes the marginal values of `h` along that order.
pub fn separate_polymatroid(coeffs: &SubmodularCoeffs, o_hat: &[f64], tau_hat: f64) -> Option<Vec<f64>> {
    let mut order: Vec<usize> = (0..o_hat.len()).collect();
    order.sort_by(|&a, &b| o_hat[b].total_cmp(&o_hat[a]).then(a.cmp(&b)));
    let mut pi = vec![0.0; o_hat.len()];
    let mut acc = coeffs.sigma;
    let mut prev = 0.0;
    for &i in &order {
        acc += coeffs.d[i];
        let cur = acc.sqrt();
        pi[i] = cur - prev;
        prev = cur;
    }
    let lhs: f64 = pi.iter().zip(o_hat).map(|(p, o)| p * o).sum();
    (lhs > tau_hat).then_some(pi)
}

/// Tangent of `sqrt(u w)` at `(u0, w0)`: `tau <= (a u + w / a) / 2` with `a = sqrt(w0 / u0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicCut {
    pub a: f64,
}

impl HyperbolicCut {
    /// The cut as `tau - (a/2) u - (1/(2a)) w <= 0`.
    pub fn row(&self, u: usize, w: usize, tau: usize) -> LinRow {
        LinRow::from_terms([(tau, 1.0), (u, -0.5 * self.a), (w, -0.5 / self.a)], Sense::Le, 0.0)
    }

    pub fn rhs_at(&self, u: f64, w: f64) -> f64 {
        0.5 * (self.a * u + w / self.a)
    }
}

pub fn hyperbolic_oa_cut(u0: f64, w0: f64) -> HyperbolicCut {
    let u0 = u0.max(1e-9);
    let w0 = w0.max(1e-9);
    HyperbolicCut { a: (w0 / u0).sqrt() }
}

/// Monotonicity of the staircase binaries: `y_{n+1} >= y_n`, with the
/// implicit last one fixed at 1 (so the final cut reads `y_{N'-1} <= 1`).
pub fn ordering_cuts(y: &[usize]) -> Vec<Cut> {
    let mut cuts = Vec::with_capacity(y.len());
    for n in 0..y.len() {
        let row = if n + 1 < y.len() {
            LinRow::from_terms([(y[n + 1], 1.0), (y[n], -1.0)], Sense::Ge, 0.0)
        } else {
            LinRow::from_terms([(y[n], 1.0)], Sense::Le, 1.0)
        };
        cuts.push(Cut { row, tag: CutTag::Ordering });
    }
    cuts
}

/// `T x >= L_{N'} + sum_n (L_n - L_{n+1}) y_n` for staircase levels `L`.
pub fn star_cut(tech: &[(usize, f64)], levels: &[f64], y: &[usize]) -> Cut {
    let last = levels[levels.len() - 1];
    let mut row = LinRow::from_terms(tech.iter().copied(), Sense::Ge, last);
    for (n, &yn) in y.iter().enumerate() {
        row.add(yn, -(levels[n] - levels[n + 1]));
    }
    Cut { row, tag: CutTag::Star }
}

/// Gradient cut for a violated cone at `x`; `None` when `x` is inside or at the apex.
pub fn soc_oa_cut(cone: &ConeTag, x: &[f64]) -> Option<Cut> {
    if cone.residual(x) <= 0.0 {
        return None;
    }
    match cone.kind {
        ConeKind::Soc => {
            let head = cone.members[0];
            let norm = (cone.constant
                + cone.tail().iter().zip(&cone.scales).map(|(&j, s)| (s * x[j]).powi(2)).sum::<f64>())
            .sqrt();
            if norm <= 1e-12 {
                return None;
            }
            let mut row = LinRow::new(Sense::Ge, cone.constant / norm);
            row.add(head, 1.0);
            for (&j, s) in cone.tail().iter().zip(&cone.scales) {
                row.add(j, -s * s * x[j] / norm);
            }
            Some(Cut { row, tag: CutTag::SocOa })
        }
        ConeKind::RotatedSoc => {
            // 2 a b >= z^2  <=>  a + b >= ||(a - b, sqrt(2) z)||
            let (a, b) = (cone.members[0], cone.members[1]);
            let diff = x[a] - x[b];
            let tail_sq: f64 = cone.tail().iter().zip(&cone.scales).map(|(&j, s)| (s * x[j]).powi(2)).sum::<f64>();
            let norm = (diff * diff + 2.0 * (cone.constant + tail_sq)).sqrt();
            if norm <= 1e-12 {
                return None;
            }
            let mut row = LinRow::new(Sense::Ge, 2.0 * cone.constant / norm);
            row.add(a, 1.0 - diff / norm);
            row.add(b, 1.0 + diff / norm);
            for (&j, s) in cone.tail().iter().zip(&cone.scales) {
                row.add(j, -2.0 * s * s * x[j] / norm);
            }
            Some(Cut { row, tag: CutTag::SocOa })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_coefficients() {
        let s = SampleSet::new(vec![10.0, 8.0, 6.0, 4.0, 2.0], 0.5).unwrap();
        let c = SubmodularCoeffs::for_pairs(&s, vec![(1, 3), (0, 0), (0, 4)]);
        assert_eq!(c.d, vec![6.0, 0.0, 20.0]);
        assert_eq!(c.sigma, 2.5);
        assert_eq!(SubmodularCoeffs::full(&s).pairs.len(), 15);
    }

    #[test]
    fn ordering_and_star_shapes() {
        let y = [3, 4];
        let cuts = ordering_cuts(&y);
        assert_eq!(cuts.len(), 2);
        let star = star_cut(&[(0, 1.0)], &[10.0, 8.0, 6.0], &y);
        // y = (0, 1): T x >= 6 + 2 = 8
        let x = [8.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(star.row.violation(&x), 0.0);
        let x = [7.9, 0.0, 0.0, 0.0, 1.0];
        assert!(star.row.violation(&x) > 0.0);
    }

    #[test]
    fn soc_cut_separates() {
        let cone =
            ConeTag { name: "c".into(), kind: ConeKind::Soc, members: vec![0, 1], scales: vec![1.0], constant: 9.0 };
        let x = [1.0, 4.0];
        let cut = soc_oa_cut(&cone, &x).unwrap();
        assert!(cut.row.violation(&x) > 0.0);
        // valid at points on the cone surface
        for t in [-3.0, 0.0, 2.0, 10.0] {
            let p = [(9.0f64 + t * t).sqrt(), t];
            assert!(cut.row.violation(&p) < 1e-9);
        }
    }

    #[test]
    fn rotated_cut_separates() {
        let cone = ConeTag {
            name: "r".into(),
            kind: ConeKind::RotatedSoc,
            members: vec![0, 1, 2],
            scales: vec![2f64.sqrt()],
            constant: 0.0,
        };
        let x = [1.0, 1.0, 2.0];
        let cut = soc_oa_cut(&cone, &x).unwrap();
        assert!(cut.row.violation(&x) > 0.0);
        for (u, w) in [(1.0f64, 4.0f64), (2.0, 2.0), (0.5, 8.0)] {
            let p = [u, w, (u * w).sqrt()];
            assert!(cut.row.violation(&p) < 1e-9);
        }
    }
}
