//! Bessel J1 and the ground Mathieu characteristic value a0(q).
//!
//! The Bessel helpers are also exposed as power series in `s = x²`. That is the
//! form the phase-space code needs: it evaluates J1(e)/e and J1'(e) with
//! `s = e² = A_x² + A_z²`, which is smooth everywhere on the sphere.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFunctionError {
    #[error("argument {0} is not finite")]
    NonFinite(f64),
    #[error("argument {0} outside supported range |x| <= 10")]
    OutOfRange(f64),
    #[error("Mathieu truncation did not converge (last change {change:e} at order {order})")]
    NoConvergence { order: usize, change: f64 },
}

const MAX_BESSEL_ARG: f64 = 10.0;

fn check_arg(x: f64) -> Result<(), SpecialFunctionError> {
    if !x.is_finite() {
        return Err(SpecialFunctionError::NonFinite(x));
    }
    if x.abs() > MAX_BESSEL_ARG {
        return Err(SpecialFunctionError::OutOfRange(x));
    }
    Ok(())
}

/// Order-one Bessel function of the first kind.
pub fn bessel_j1(x: f64) -> Result<f64, SpecialFunctionError> {
    check_arg(x)?;
    Ok(x * j1_over_x(x * x))
}

/// Derivative of [`bessel_j1`].
pub fn bessel_j1_prime(x: f64) -> Result<f64, SpecialFunctionError> {
    check_arg(x)?;
    Ok(j1_prime(x * x))
}

/// Bessel series coefficients c_k = (-1)^k / (2^(2k+1) k! (k+1)!), so that
/// J1(x)/x = sum c_k s^k with s = x².
fn series_terms(s: f64) -> impl Iterator<Item = (f64, f64)> {
    // yields (k, c_k s^k)
    let mut term = 0.5;
    let mut k = 0.0_f64;
    std::iter::from_fn(move || {
        let out = (k, term);
        k += 1.0;
        term *= -s / (4.0 * k * (k + 1.0));
        Some(out)
    })
}

fn sum_series(s: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for (k, t) in series_terms(s) {
        let v = weight(k) * t;
        sum += v;
        if k > s / 4.0 + 2.0 && v.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    sum
}

/// J1(x)/x as a function of s = x².
pub fn j1_over_x(s: f64) -> f64 {
    sum_series(s, |_| 1.0)
}

/// d/ds of [`j1_over_x`].
pub fn j1_over_x_ds(s: f64) -> f64 {
    // sum k c_k s^(k-1) = sum_{k>=1} (k+1) c_{k+1} s^k, c_{k+1} = -c_k/(4(k+1)(k+2))
    sum_series(s, |k| -1.0 / (4.0 * (k + 2.0)))
}

/// J1'(x) as a function of s = x².
pub fn j1_prime(s: f64) -> f64 {
    sum_series(s, |k| 2.0 * k + 1.0)
}

/// d/ds of [`j1_prime`].
pub fn j1_prime_ds(s: f64) -> f64 {
    sum_series(s, |k| -(2.0 * k + 3.0) / (4.0 * (k + 2.0)))
}

/// (J1'(x) - J1(x)/x) / s, regular at s = 0.
pub fn j1_difference_over_s(s: f64) -> f64 {
    // sum_{k>=1} 2k c_k s^(k-1) = sum_k 2(k+1) c_{k+1} s^k
    sum_series(s, |k| -2.0 / (4.0 * (k + 2.0)))
}

/// d/ds of [`j1_difference_over_s`].
pub fn j1_difference_over_s_ds(s: f64) -> f64 {
    // sum_k 2(k+2)(k+1) c_{k+2} s^k with c_{k+2} = c_k / (16 (k+1)(k+2)^2 (k+3))
    sum_series(s, |k| 2.0 / (16.0 * (k + 2.0) * (k + 3.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MathieuMethod {
    Matrix,
    SmallQAsymptote,
    LargeQAsymptote,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MathieuCharacteristic {
    pub q: f64,
    pub a0: f64,
    pub truncation_order: usize,
    pub method: MathieuMethod,
}

pub fn mathieu_a0_small_q(q: f64) -> f64 {
    -0.5 * q * q
}

pub fn mathieu_a0_large_q(q: f64) -> f64 {
    let q = q.abs();
    -2.0 * q + 2.0 * q.sqrt()
}

fn initial_truncation(q: f64) -> usize {
    2 * (q.sqrt().ceil() as usize) + 25
}

/// Lowest characteristic value of the even π-periodic Mathieu problem,
/// with the truncation grown until a 50% larger matrix agrees to 1e-10.
pub fn mathieu_a0(q: f64) -> Result<MathieuCharacteristic, SpecialFunctionError> {
    if !q.is_finite() {
        return Err(SpecialFunctionError::NonFinite(q));
    }
    let q = q.abs();
    if q == 0.0 {
        return Ok(MathieuCharacteristic {
            q,
            a0: 0.0,
            truncation_order: 1,
            method: MathieuMethod::Matrix,
        });
    }
    let mut order = initial_truncation(q);
    let mut last_change = f64::INFINITY;
    for _ in 0..12 {
        let a = MathieuMatrix::new(q, order).lowest().0;
        let bigger = MathieuMatrix::new(q, order + order.div_ceil(2)).lowest().0;
        last_change = (a - bigger).abs();
        if last_change < 1e-10 * a.abs().max(1.0) {
            return Ok(MathieuCharacteristic {
                q,
                a0: a,
                truncation_order: order,
                method: MathieuMethod::Matrix,
            });
        }
        order *= 2;
    }
    Err(SpecialFunctionError::NoConvergence {
        order,
        change: last_change,
    })
}

/// a0(q) and da0/dq at a fixed safe truncation. This is the hot-path variant
/// used inside contour tracing; `q` must be finite.
pub fn mathieu_a0_with_slope(q: f64) -> (f64, f64) {
    let sign = if q < 0.0 { -1.0 } else { 1.0 };
    let q = q.abs();
    if q < 1e-6 {
        let q2 = q * q;
        return (-0.5 * q2 + 7.0 / 128.0 * q2 * q2, sign * (-q + 7.0 / 32.0 * q2 * q));
    }
    let (a, da) = MathieuMatrix::new(q, initial_truncation(q) + 6).lowest();
    (a, sign * da)
}

/// Symmetric tridiagonal matrix of the even cosine harmonics cos(2rv):
/// diagonal (2r)², off-diagonal √2 q for the first link and q after.
struct MathieuMatrix {
    q: f64,
    n: usize,
}

impl MathieuMatrix {
    fn new(q: f64, n: usize) -> Self {
        Self { q, n }
    }

    fn diag(&self, r: usize) -> f64 {
        let r = 2.0 * r as f64;
        r * r
    }

    // b_r couples r and r+1; returns (b², d(b²)/dq)
    fn off_sq(&self, r: usize) -> (f64, f64) {
        let c = if r == 0 { 2.0 } else { 1.0 };
        (c * self.q * self.q, 2.0 * c * self.q)
    }

    /// Pivots of the UDUᵀ factorization of T - λ, eliminated from the high
    /// harmonics down so the final pivot sits at r = 0 where the ground
    /// eigenvector is large. Returns (number of non-positive pivots, final
    /// pivot, Σ d'_i/d_i w.r.t. λ and q over the other pivots, final pivot's
    /// derivatives w.r.t. λ and q).
    fn pivots(&self, lambda: f64) -> (usize, f64, f64, f64, f64, f64) {
        let mut neg = 0;
        let mut d = self.diag(self.n - 1) - lambda;
        let mut dl = -1.0;
        let mut dq = 0.0;
        let mut sum_l = 0.0;
        let mut sum_q = 0.0;
        if d <= 0.0 {
            neg += 1;
        }
        for r in (0..self.n - 1).rev() {
            sum_l += dl / d;
            sum_q += dq / d;
            let (b2, db2) = self.off_sq(r);
            let dd = if d == 0.0 { f64::MIN_POSITIVE } else { d };
            let nd = self.diag(r) - lambda - b2 / dd;
            let ndl = -1.0 + b2 * dl / (dd * dd);
            let ndq = -db2 / dd + b2 * dq / (dd * dd);
            d = nd;
            dl = ndl;
            dq = ndq;
            if d <= 0.0 {
                neg += 1;
            }
        }
        (neg, d, sum_l, sum_q, dl, dq)
    }

    fn is_below(&self, lambda: f64) -> bool {
        self.pivots(lambda).0 == 0
    }

    /// Lowest eigenvalue and its q-derivative.
    fn lowest(&self) -> (f64, f64) {
        let q = self.q;
        // Guaranteed lower bound: a0 > -2q for q > 0.
        let floor = -2.0 * q - 1.0;
        let guess = if q < 1.0 {
            -0.5 * q * q + 7.0 / 128.0 * q.powi(4) - 0.05 * q * q - 1e-3
        } else {
            -2.0 * q + 2.0 * q.sqrt() - 0.25 - 0.2
        };
        let mut lambda = if self.is_below(guess) { guess } else { floor };
        let mut derivative = 0.0;
        for _ in 0..200 {
            let (_, d, sl, sq, dl, dq) = self.pivots(lambda);
            // Newton on log det: step = -det/det' = -d / (dl + d·sl)
            let denom = dl + d * sl;
            let step = -d / denom;
            derivative = -(dq + d * sq) / denom;
            let next = lambda + step;
            if !(step > 0.0) || !next.is_finite() {
                break;
            }
            if !self.is_below(next) {
                // Exact Newton from below cannot overshoot, so this is rounding
                // at the root itself.
                lambda = next;
                let (_, d, sl, sq, dl, dq) = self.pivots(lambda);
                derivative = -(dq + d * sq) / (dl + d * sl);
                break;
            }
            lambda = next;
            if step <= 1e-16 * lambda.abs().max(1.0) {
                break;
            }
        }
        (lambda, derivative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn series_oracle(x: f64) -> (f64, f64) {
        // direct term-by-term sum in x, independent of the s-series code
        let mut j = 0.0;
        let mut jp = 0.0;
        let mut fact_k = 1.0;
        for k in 0..60 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_k1 = fact_k * (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let p = 2 * k + 1;
            j += sign * (x / 2.0).powi(p as i32) / (fact_k * fact_k1);
            jp += sign * p as f64 * (x / 2.0).powi(p as i32 - 1) / (2.0 * fact_k * fact_k1);
        }
        (j, jp)
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
        assert!((bessel_j1_prime(0.0).unwrap() - 0.5).abs() < 1e-16);
        assert!((bessel_j1(1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j1(0.5).unwrap() - 0.242_268_457_674_873_9).abs() < 1e-15);
        assert!((bessel_j1_prime(1.0).unwrap() - 0.325_147_100_813_033_0).abs() < 1e-15);
        assert!((bessel_j1_prime(0.5).unwrap() - 0.453_932_891_891_065_2).abs() < 1e-15);
        for i in 0..=100 {
            let x = -10.0 + 0.2 * i as f64;
            let (j, jp) = series_oracle(x);
            assert!((bessel_j1(x).unwrap() - j).abs() < 1e-11, "x={x}");
            assert!((bessel_j1_prime(x).unwrap() - jp).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn bessel_domain_errors() {
        assert!(bessel_j1(f64::NAN).is_err());
        assert!(bessel_j1_prime(f64::INFINITY).is_err());
        assert!(bessel_j1(10.5).is_err());
    }

    #[test]
    fn s_series_derivatives_match_differences() {
        let h = 1e-5;
        for &s in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            let fd = |f: fn(f64) -> f64| (f(s + h) - f(s - h)) / (2.0 * h);
            assert!((j1_over_x_ds(s) - fd(j1_over_x)).abs() < 1e-9);
            assert!((j1_prime_ds(s) - fd(j1_prime)).abs() < 1e-9);
            assert!((j1_difference_over_s_ds(s) - fd(j1_difference_over_s)).abs() < 1e-9);
            if s > 0.0 {
                let direct = (j1_prime(s) - j1_over_x(s)) / s;
                assert!((direct - j1_difference_over_s(s)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn j1_prime_identity_with_j0() {
        // J1' = J0 - J1/x, with J0 from its own series
        for &x in &[0.1_f64, 0.4, 0.8, 1.0] {
            let mut j0 = 0.0;
            let mut term = 1.0;
            for k in 0..40 {
                if k > 0 {
                    term *= -(x * x) / (4.0 * (k * k) as f64);
                }
                j0 += term;
            }
            let lhs = bessel_j1_prime(x).unwrap();
            assert!((lhs - (j0 - bessel_j1(x).unwrap() / x)).abs() < 1e-14);
        }
    }

    fn dense_oracle(q: f64, n: usize) -> f64 {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = (2.0 * r as f64).powi(2);
            if r + 1 < n {
                let b = if r == 0 { 2f64.sqrt() * q } else { q };
                m[(r, r + 1)] = b;
                m[(r + 1, r)] = b;
            }
        }
        m.symmetric_eigenvalues().min()
    }

    #[test]
    fn mathieu_reference_values() {
        assert_eq!(mathieu_a0(0.0).unwrap().a0, 0.0);
        let one = mathieu_a0(1.0).unwrap();
        assert!((one.a0 - (-0.455_138_604_107_413_6)).abs() < 1e-12);
        assert!((one.a0 - dense_oracle(1.0, 200)).abs() < 1e-12);
        let big = mathieu_a0(25.0).unwrap();
        assert!((big.a0 - (-40.0)).abs() < 0.02 * 40.0);
        assert!((big.a0 - dense_oracle(25.0, 200)).abs() < 1e-10 * 40.0);
        let circ = mathieu_a0(36.0).unwrap();
        assert!((circ.a0 - mathieu_a0_large_q(36.0)).abs() < 0.02 * 60.0);
        assert_eq!(mathieu_a0(-3.0).unwrap().a0, mathieu_a0(3.0).unwrap().a0);
    }

    #[test]
    fn asymptote_formulas() {
        assert!((mathieu_a0_small_q(0.1) + 0.005).abs() < 1e-18);
        assert_eq!(mathieu_a0_large_q(25.0), -40.0);
        assert_eq!(mathieu_a0_large_q(36.0), -60.0);
        let m = mathieu_a0(0.1).unwrap().a0;
        assert!((m + 0.005).abs() < 0.01 * 0.005);
    }

    #[test]
    fn hot_path_matches_converged_value_and_slope() {
        for &q in &[1e-7, 1e-3, 0.3, 1.0, 5.0, 17.3, 36.0, 96.0] {
            let (a, da) = mathieu_a0_with_slope(q);
            let reference = mathieu_a0(q).unwrap().a0;
            assert!((a - reference).abs() < 1e-12 * reference.abs().max(1.0), "q={q}");
            let h = (1e-4 * q.max(0.1)).min(0.5 * q);
            let fd = (mathieu_a0_with_slope(q + h).0 - mathieu_a0_with_slope(q - h).0) / (2.0 * h);
            assert!((da - fd).abs() < 1e-6 * da.abs().max(1e-3), "q={q} {da} {fd}");
        }
    }

    #[test]
    fn truncation_is_converged() {
        for &q in &[0.5, 8.0, 50.0] {
            let m = mathieu_a0(q).unwrap();
            let n = m.truncation_order;
            let bigger = MathieuMatrix::new(q, n + n / 2).lowest().0;
            assert!((m.a0 - bigger).abs() < 1e-10 * m.a0.abs().max(1.0));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn a0_non_increasing(q in 0.0f64..80.0, dq in 0.0f64..5.0) {
                let a = mathieu_a0(q).unwrap().a0;
                let b = mathieu_a0(q + dq).unwrap().a0;
                prop_assert!(b <= a + 1e-12);
            }

            #[test]
            fn small_q_band(q in 0.0f64..0.1) {
                let a = mathieu_a0(q).unwrap().a0;
                prop_assert!((a + 0.5 * q * q).abs() <= 0.01 * (0.5 * q * q).max(1e-12));
            }

            #[test]
            fn large_q_band(q in 25.0f64..100.0) {
                let a = mathieu_a0(q).unwrap().a0;
                prop_assert!((a - mathieu_a0_large_q(q)).abs() <= 0.02 * 2.0 * q);
            }

            #[test]
            fn even_in_q(q in -50.0f64..50.0) {
                prop_assert_eq!(mathieu_a0(q).unwrap().a0, mathieu_a0(-q).unwrap().a0);
            }

            #[test]
            fn j1_prime_is_derivative(x in 0.05f64..1.0) {
                let h = 1e-5;
                let fd = (bessel_j1(x + h).unwrap() - bessel_j1(x - h).unwrap()) / (2.0 * h);
                prop_assert!((fd - bessel_j1_prime(x).unwrap()).abs() < 1e-8);
            }
        }
    }
}
