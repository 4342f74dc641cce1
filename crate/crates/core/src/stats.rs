//! Descriptive summaries, the Mann–Whitney U test and least-squares
//! polynomial fits.

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    Empty,
    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("degree {degree} fit needs at least {need} points, got {got}")]
    Underdetermined {
        degree: usize,
        need: usize,
        got: usize,
    },
    #[error("x values take only {distinct} distinct values, degree {degree} fit is degenerate")]
    DegenerateX { distinct: usize, degree: usize },
}

/// Five-number summary plus mean.
///
/// `median` averages the two middle elements for even `n`; `q1` and `q3` are
/// medians of the lower and upper halves, with the overall median excluded
/// from both halves when `n` is odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub q3: f64,
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn descriptive_summary(values: &[f64]) -> Result<Summary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let v = sorted_copy(values);
    let n = v.len();
    let (lower, upper) = if n == 1 {
        (&v[..], &v[..])
    } else {
        (&v[..n / 2], &v[n.div_ceil(2)..])
    };
    Ok(Summary {
        n,
        mean: v.iter().sum::<f64>() / n as f64,
        median: median_of_sorted(&v),
        min: v[0],
        max: v[n - 1],
        q1: median_of_sorted(lower),
        q3: median_of_sorted(upper),
    })
}

/// Means of the lowest and highest `⌊n/2⌋` values (the middle element is
/// dropped for odd `n`).
pub fn half_means(values: &[f64]) -> Result<(f64, f64), StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFew {
            need: 2,
            got: values.len(),
        });
    }
    let v = sorted_copy(values);
    let h = v.len() / 2;
    let lo = v[..h].iter().sum::<f64>() / h as f64;
    let hi = v[v.len() - h..].iter().sum::<f64>() / h as f64;
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Two-sided Mann–Whitney U test.
///
/// Ranks are midranks over the pooled sample. The p-value uses the normal
/// approximation with tie-corrected variance and a 0.5 continuity
/// correction, so it is coarse for very small samples.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let midrank = (i + 1 + j) as f64 / 2.0;
        let in_a = pooled[i..j].iter().filter(|e| e.1).count() as f64;
        rank_sum_a += midrank * in_a;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    let u = rank_sum_a - na * (na + 1.0) / 2.0;
    let n = na + nb;
    let mean = na * nb / 2.0;
    let var = if n > 1.0 {
        na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(MannWhitney { u, p })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub degree: usize,
    /// Highest degree first.
    pub coefficients: Vec<f64>,
    pub rmse: f64,
}

impl FitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc * x + c)
    }

    /// Coefficient of `x^power`, zero if the fit has no such term.
    pub fn coefficient(&self, power: usize) -> f64 {
        if power > self.degree {
            0.0
        } else {
            self.coefficients[self.degree - power]
        }
    }
}

/// Least-squares polynomial fit via Householder QR of the Vandermonde
/// matrix.
pub fn polyfit(points: &[(f64, f64)], degree: usize) -> Result<FitResult, StatsError> {
    let m = points.len();
    let cols = degree + 1;
    if m < cols {
        return Err(StatsError::Underdetermined {
            degree,
            need: cols,
            got: m,
        });
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < cols {
        return Err(StatsError::DegenerateX {
            distinct: xs.len(),
            degree,
        });
    }

    // column j holds x^(degree - j)
    let design = DMatrix::from_fn(m, cols, |i, j| points[i].0.powi((degree - j) as i32));
    let y = DVector::from_iterator(m, points.iter().map(|p| p.1));
    let qr = design.clone().qr();
    let qty = qr.q().transpose() * &y;
    let coeffs = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or(StatsError::DegenerateX {
            distinct: xs.len(),
            degree,
        })?;
    let residual = &y - &design * &coeffs;
    let rmse = (residual.norm_squared() / m as f64).sqrt();
    Ok(FitResult {
        degree,
        coefficients: coeffs.iter().copied().collect(),
        rmse,
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr_free::normal;

    /// Box–Muller without pulling in rand_distr.
    mod rand_distr_free {
        use rand::Rng;
        pub fn normal<R: Rng>(rng: &mut R) -> f64 {
            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }

    #[test]
    fn summary_of_four() {
        let s = descriptive_summary(&[4.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.5);
        assert_eq!(s.q3, 3.5);
        assert_eq!((s.min, s.max, s.mean), (1.0, 4.0, 2.5));
    }

    #[test]
    fn summary_of_singleton() {
        let s = descriptive_summary(&[5.0]).unwrap();
        for v in [s.mean, s.median, s.min, s.max, s.q1, s.q3] {
            assert_eq!(v, 5.0);
        }
    }

    #[test]
    fn summary_odd_excludes_median_from_halves() {
        let s = descriptive_summary(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.5, 3.0, 4.5));
    }

    #[test]
    fn summary_rejects_empty() {
        assert_eq!(descriptive_summary(&[]), Err(StatsError::Empty));
    }

    #[test]
    fn uniform_median_is_near_half() {
        let mut rng = rng_from_seed(5);
        let v: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let s = descriptive_summary(&v).unwrap();
        assert!((s.median - 0.5).abs() < 0.02);
    }

    // sort, then index directly
    fn brute_summary(values: &[f64]) -> (f64, f64, f64, f64, f64) {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = |s: &[f64]| {
            let k = s.len();
            if k % 2 == 1 {
                s[k / 2]
            } else {
                (s[k / 2 - 1] + s[k / 2]) / 2.0
            }
        };
        let n = v.len();
        let (lo, hi): (Vec<f64>, Vec<f64>) = if n == 1 {
            (v.clone(), v.clone())
        } else if n.is_multiple_of(2) {
            (v[..n / 2].to_vec(), v[n / 2..].to_vec())
        } else {
            (v[..n / 2].to_vec(), v[n / 2 + 1..].to_vec())
        };
        (v[0], med(&lo), med(&v), med(&hi), v[n - 1])
    }

    #[test]
    fn summary_matches_sorted_oracle() {
        let mut rng = rng_from_seed(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..60);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-50..50) as f64).collect();
            let s = descriptive_summary(&v).unwrap();
            let (mn, q1, med, q3, mx) = brute_summary(&v);
            assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (mn, q1, med, q3, mx));
            assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
        }
    }

    #[test]
    fn half_means_cases() {
        assert_eq!(half_means(&[4.0, 1.0, 3.0, 2.0]).unwrap(), (1.5, 3.5));
        assert_eq!(half_means(&[3.0, 1.0, 2.0]).unwrap(), (1.0, 3.0));
        assert_eq!(half_means(&[7.0; 5]).unwrap(), (7.0, 7.0));
        assert!(matches!(half_means(&[1.0]), Err(StatsError::TooFew { .. })));
    }

    #[test]
    fn mwu_total_separation() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.p < 0.2);
        let r = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u, 9.0);
    }

    #[test]
    fn mwu_identical_samples() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, (a.len() * a.len()) as f64 / 2.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mwu_all_tied() {
        let r = mann_whitney_u(&[2.0; 4], &[2.0; 6]).unwrap();
        assert_eq!(r.u, 12.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn mwu_rejects_empty() {
        assert_eq!(mann_whitney_u(&[], &[1.0]), Err(StatsError::Empty));
    }

    #[test]
    fn mwu_reference_value() {
        // midranks: a = {1, 2.5, 4.5}, U_a = 8 - 6 = 2; tie term = 2 * 6
        // var = 3*4/12 * (8 - 12/42); z = (|2 - 6| - 0.5) / sqrt(var)
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0, 5.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 2.0);
        let var: f64 = 8.0 - 12.0 / 42.0;
        let z = 3.5 / var.sqrt();
        assert!((r.p - erfc(z / std::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!((r.p - 0.2073).abs() < 1e-3);
    }

    #[test]
    fn mwu_calibration_under_null() {
        let mut rng = rng_from_seed(2024);
        let reps = 1000;
        let mut rejections = 0;
        for _ in 0..reps {
            let a: Vec<f64> = (0..100).map(|_| normal(&mut rng)).collect();
            let b: Vec<f64> = (0..100).map(|_| normal(&mut rng)).collect();
            if mann_whitney_u(&a, &b).unwrap().p < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!((0.02..=0.09).contains(&rate), "rejection rate {rate}");
    }

    proptest! {
        #[test]
        fn mwu_u_values_sum_to_product(
            a in prop::collection::vec(0i32..20, 1..30),
            b in prop::collection::vec(0i32..20, 1..30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ua = mann_whitney_u(&a, &b).unwrap();
            let ub = mann_whitney_u(&b, &a).unwrap();
            prop_assert!((ua.u + ub.u - (a.len() * b.len()) as f64).abs() < 1e-9);
            prop_assert!((ua.p - ub.p).abs() < 1e-12);
        }

        #[test]
        fn mwu_is_invariant_under_monotone_maps(
            a in prop::collection::vec(-10i32..10, 1..25),
            b in prop::collection::vec(-10i32..10, 1..25),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let f = |x: f64| (x / 3.0).exp() * 7.0 - 2.0;
            let r0 = mann_whitney_u(&a, &b).unwrap();
            let ta: Vec<f64> = a.iter().map(|&x| f(x)).collect();
            let tb: Vec<f64> = b.iter().map(|&x| f(x)).collect();
            let r1 = mann_whitney_u(&ta, &tb).unwrap();
            prop_assert_eq!(r0.u, r1.u);
            prop_assert!((r0.p - r1.p).abs() < 1e-12);
        }

        #[test]
        fn polyfit_residual_is_orthogonal_to_design(
            ys in prop::collection::vec(-100.0f64..100.0, 6..30),
            degree in 0usize..4,
        ) {
            let pts: Vec<(f64, f64)> =
                ys.iter().enumerate().map(|(i, &y)| (i as f64 * 0.5 + 1.0, y)).collect();
            let fit = polyfit(&pts, degree).unwrap();
            prop_assert_eq!(fit.coefficients.len(), degree + 1);
            for k in 0..=degree {
                let dot: f64 = pts.iter().map(|&(x, y)| (y - fit.eval(x)) * x.powi(k as i32)).sum();
                let scale: f64 = pts
                    .iter()
                    .map(|&(x, y)| (y.abs() + 1.0) * x.powi(k as i32).abs())
                    .sum();
                prop_assert!(dot.abs() <= 1e-6 * scale, "k={} dot={} scale={}", k, dot, scale);
            }
        }
    }

    #[test]
    fn polyfit_exact_parabola() {
        let pts: Vec<(f64, f64)> = (0..=5).map(|x| (x as f64, (x * x) as f64)).collect();
        let fit = polyfit(&pts, 2).unwrap();
        for (c, e) in fit.coefficients.iter().zip([1.0, 0.0, 0.0]) {
            assert!((c - e).abs() < 1e-9, "{:?}", fit.coefficients);
        }
        assert!(fit.rmse < 1e-9);
    }

    #[test]
    fn polyfit_three_points_interpolates() {
        let fit = polyfit(&[(-1.0, 4.0), (0.5, -2.0), (3.0, 7.0)], 2).unwrap();
        assert!(fit.rmse < 1e-9);
        assert!((fit.eval(0.5) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn polyfit_noisy_line_recovers_slope() {
        let mut rng = rng_from_seed(8);
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let x = i as f64 / 10.0;
                (x, 2.0 * x - 12.0 + 0.05 * normal(&mut rng))
            })
            .collect();
        let fit = polyfit(&pts, 1).unwrap();
        assert!((fit.coefficient(1) - 2.0).abs() < 0.01);
        assert!((fit.coefficient(0) + 12.0).abs() < 0.05);
        assert!((fit.rmse - 0.05).abs() < 0.01);
    }

    #[test]
    fn polyfit_errors() {
        assert!(matches!(
            polyfit(&[(0.0, 1.0), (1.0, 2.0)], 2),
            Err(StatsError::Underdetermined { .. })
        ));
        assert!(matches!(
            polyfit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 1),
            Err(StatsError::DegenerateX { .. })
        ));
    }
}
