//! Dense univariate polynomials, Chebyshev families, and real root isolation.

use crate::error::{CoreError, Result};

/// A univariate polynomial stored densely, coefficients in ascending power.
/// The leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePolynomial {
    coeffs: Vec<f64>,
}

impl UnivariatePolynomial {
    pub fn zero() -> Self {
        UnivariatePolynomial { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// Build from ascending-power coefficients; trailing zeros are trimmed.
    pub fn from_coeffs(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        UnivariatePolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree; −1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coefficient(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> UnivariatePolynomial {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(e, &c)| e as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &UnivariatePolynomial) -> UnivariatePolynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::from_coeffs(out)
    }

    pub fn sub(&self, other: &UnivariatePolynomial) -> UnivariatePolynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &UnivariatePolynomial) -> UnivariatePolynomial {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, s: f64) -> UnivariatePolynomial {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Sum of absolute coefficient values.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

/// Chebyshev polynomial of the first kind, `T_n(cos θ) = cos(nθ)`.
///
/// Satisfies `T_0 = 1`, `T_1 = t`, `T_n = 2t T_{n−1} − T_{n−2}`; the leading
/// coefficient is `2^{n−1}` for `n ≥ 1`.
pub fn chebyshev_t(n: usize) -> UnivariatePolynomial {
    match n {
        0 => UnivariatePolynomial::constant(1.0),
        1 => UnivariatePolynomial::from_coeffs(vec![0.0, 1.0]),
        _ => {
            let mut prev = chebyshev_t(0);
            let mut cur = chebyshev_t(1);
            let two_t = UnivariatePolynomial::from_coeffs(vec![0.0, 2.0]);
            for _ in 2..=n {
                let next = two_t.mul(&cur).sub(&prev);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Chebyshev polynomial of the second kind, `U_n = T_{n+1}' / (n+1)`, with
/// the convention `U_{−1} = 0`.
pub fn chebyshev_u(n: i64) -> UnivariatePolynomial {
    match n {
        -1 => UnivariatePolynomial::zero(),
        0 => UnivariatePolynomial::constant(1.0),
        1 => UnivariatePolynomial::from_coeffs(vec![0.0, 2.0]),
        _ => {
            assert!(n >= -1, "U_n defined for n >= -1");
            let mut prev = chebyshev_u(0);
            let mut cur = chebyshev_u(1);
            let two_t = UnivariatePolynomial::from_coeffs(vec![0.0, 2.0]);
            for _ in 2..=n {
                let next = two_t.mul(&cur).sub(&prev);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Number of initial subdivision intervals for root bracketing.  Cheap and
/// robust for the degree ≤ 6 polynomials appearing in this crate.
const ROOT_SUBDIVISIONS: usize = 4096;

/// All real roots of `q` in `[lo, hi]`, ascending, each accurate to `tol`.
///
/// Sign-change bracketing on a fine subdivision followed by bisection and a
/// Newton polish.  Fails if a reported root has residual above
/// `tol * (1 + Σ|coeff|)`.
pub fn real_roots(q: &UnivariatePolynomial, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    if q.is_zero() {
        return Err(CoreError::InvalidArgument(
            "real_roots requires a nonzero polynomial".into(),
        ));
    }
    if !(lo < hi) {
        return Err(CoreError::InvalidArgument(format!(
            "real_roots requires lo < hi, got [{lo}, {hi}]"
        )));
    }
    let tol = tol.max(f64::EPSILON);
    let step = (hi - lo) / ROOT_SUBDIVISIONS as f64;
    let deriv = q.derivative();
    let mut roots: Vec<f64> = Vec::new();

    let push_root = |r: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|&x| (x - r).abs() <= tol.max(step * 1e-6)) {
            roots.push(r);
        }
    };

    let mut prev_x = lo;
    let mut prev_v = q.eval(lo);
    if prev_v == 0.0 {
        push_root(lo, &mut roots);
    }
    for i in 1..=ROOT_SUBDIVISIONS {
        let x = if i == ROOT_SUBDIVISIONS {
            hi
        } else {
            lo + step * i as f64
        };
        let v = q.eval(x);
        if v == 0.0 {
            push_root(x, &mut roots);
        } else if prev_v != 0.0 && prev_v.signum() != v.signum() {
            let r = refine_root(q, &deriv, prev_x, x, tol);
            push_root(r, &mut roots);
        }
        prev_x = x;
        prev_v = v;
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = tol * (1.0 + q.coeff_norm());
    for &r in &roots {
        let residual = q.eval(r).abs();
        if residual > scale {
            return Err(CoreError::RootFinding(format!(
                "residual {residual:.3e} at root {r} exceeds {scale:.3e}"
            )));
        }
    }
    Ok(roots)
}

/// Bisection to `tol`, then Newton steps kept inside the bracket.
fn refine_root(
    q: &UnivariatePolynomial,
    deriv: &UnivariatePolynomial,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> f64 {
    let mut fa = q.eval(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol.min(1e-12) {
            break;
        }
        let fm = q.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa.signum() != fm.signum() {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..8 {
        let dv = deriv.eval(x);
        if dv == 0.0 {
            break;
        }
        let next = x - q.eval(x) / dv;
        if next < a || next > b || !next.is_finite() {
            break;
        }
        if (next - x).abs() < f64::EPSILON * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_first_kind_small() {
        assert_eq!(chebyshev_t(0).coeffs(), &[1.0]);
        assert_eq!(chebyshev_t(3).coeffs(), &[0.0, -3.0, 0.0, 4.0]);
        // Expanded by hand from the recurrence.
        assert_eq!(chebyshev_t(5).coeffs(), &[0.0, 5.0, 0.0, -20.0, 0.0, 16.0]);
        for n in 1..=12usize {
            assert_eq!(
                chebyshev_t(n).leading_coefficient(),
                2f64.powi(n as i32 - 1)
            );
        }
    }

    #[test]
    fn chebyshev_cosine_identity() {
        for n in 0..=12usize {
            let tn = chebyshev_t(n);
            for i in 0..1000 {
                let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / 999.0;
                let lhs = tn.eval(theta.cos());
                let rhs = (n as f64 * theta).cos();
                assert!(
                    (lhs - rhs).abs() <= 1e-10,
                    "n={n} theta={theta}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn chebyshev_second_kind() {
        assert!(chebyshev_u(-1).is_zero());
        assert_eq!(chebyshev_u(1).coeffs(), &[0.0, 2.0]);
        // U_3 = T_4' / 4 with T_4 = 8t^4 − 8t^2 + 1.
        assert_eq!(chebyshev_u(3).coeffs(), &[0.0, -4.0, 0.0, 8.0]);
        for n in 0..=10i64 {
            let u = chebyshev_u(n);
            let dt = chebyshev_t(n as usize + 1).derivative().scale(1.0 / (n as f64 + 1.0));
            for (a, b) in u.coeffs().iter().zip(dt.coeffs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let q = UnivariatePolynomial::from_coeffs(vec![-1.0, 0.0, 1.0]);
        let roots = real_roots(&q, -2.0, 2.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 1.0).abs() < 1e-10);
        assert!((roots[1] - 1.0).abs() < 1e-10);

        let t3 = chebyshev_t(3);
        let roots = real_roots(&t3, -1.0, 1.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 3);
        let s = 3f64.sqrt() / 2.0;
        assert!((roots[0] + s).abs() < 1e-10);
        assert!(roots[1].abs() < 1e-10);
        assert!((roots[2] - s).abs() < 1e-10);
    }

    #[test]
    fn smallest_root_of_quartic() {
        // 2880 t^4 − 5472 t^3 + 4880 t^2 − 1944 t + 243 on [0, 1/4]
        let q = UnivariatePolynomial::from_coeffs(vec![243.0, -1944.0, 4880.0, -5472.0, 2880.0]);
        let roots = real_roots(&q, 0.0, 0.25, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.21998).abs() < 1e-5, "root {}", roots[0]);
    }

    #[test]
    fn residual_bound_holds() {
        let q = UnivariatePolynomial::from_coeffs(vec![2.0, -7.0, 1.0, 3.0]);
        let tol = 1e-10;
        let roots = real_roots(&q, -5.0, 5.0, tol).unwrap();
        assert!(!roots.is_empty());
        for r in roots {
            assert!(q.eval(r).abs() <= tol * (1.0 + q.coeff_norm()));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(real_roots(&UnivariatePolynomial::zero(), 0.0, 1.0, 1e-10).is_err());
        let q = UnivariatePolynomial::constant(1.0);
        assert!(real_roots(&q, 1.0, 0.0, 1e-10).is_err());
        // Constant nonzero polynomial: no roots.
        assert!(real_roots(&q, 0.0, 1.0, 1e-10).unwrap().is_empty());
    }
}
