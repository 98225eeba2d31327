//! Upper-tail probabilities and normal quantiles, backed by `statrs`
//! (regularized incomplete beta for t and F).

use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};

use super::{Result, StatError};

/// `P(T > t)` for Student's t with `dof` degrees of freedom.
pub fn t_sf(t: f64, dof: usize) -> Result<f64> {
    if dof == 0 || t.is_nan() {
        return Err(StatError::Domain(format!("t_sf(t={t}, dof={dof})")));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let d = StudentsT::new(0.0, 1.0, dof as f64).expect("valid t parameters");
    Ok(d.sf(t))
}

/// Two-sided p-value for a t statistic.
pub fn t_two_sided(t: f64, dof: usize) -> Result<f64> {
    Ok((2.0 * t_sf(t.abs(), dof)?).min(1.0))
}

/// `P(F > f)` for the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_sf(f: f64, d1: usize, d2: usize) -> Result<f64> {
    if d1 == 0 || d2 == 0 || f.is_nan() || f < 0.0 {
        return Err(StatError::Domain(format!("f_sf(f={f}, d1={d1}, d2={d2})")));
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let d = FisherSnedecor::new(d1 as f64, d2 as f64).expect("valid F parameters");
    Ok(d.sf(f))
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(StatError::Domain(format!("normal_quantile(p={p})")));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson rule; independent of the incomplete-beta route.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn t_sf_at_zero_is_half() {
        for dof in [1, 2, 5, 30, 1000] {
            assert!((t_sf(0.0, dof).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn f_sf_one_one_one() {
        // F(1,1) density 1 / (pi sqrt(x) (1 + x)); substitute x = u^2 to
        // remove the singularity: P(F > 1) = int_1^inf 2 / (pi (1 + u^2)) du.
        let tail = simpson(|u| 2.0 / (std::f64::consts::PI * (1.0 + u * u)), 1.0, 1e3, 200_000) + 2.0 / (std::f64::consts::PI * 1e3);
        let closed = 1.0 - 2.0 / std::f64::consts::PI * 1f64.atan();
        assert!((tail - closed).abs() < 1e-9);
        assert!((f_sf(1.0, 1, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!((f_sf(1.0, 1, 1).unwrap() - closed).abs() < 1e-12);
    }

    #[test]
    fn normal_quantile_reference() {
        // Oracle: bisection on the CDF, itself checked against Simpson
        // integration of the density.
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = |x: f64| 0.5 + simpson(pdf, 0.0, x, 2000);
        let (mut lo, mut hi) = (1.0, 3.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 1.959_964).abs() < 1e-5);
        assert!((normal_quantile(0.975).unwrap() - lo).abs() < 1e-8);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-8);
    }

    #[test]
    fn t_sf_matches_density_integral() {
        // dof = 3 density: 6 sqrt(3) / (pi (3 + t^2)^2)
        let pdf = |t: f64| 6.0 * 3f64.sqrt() / (std::f64::consts::PI * (3.0 + t * t).powi(2));
        let cdf_part = simpson(pdf, 0.0, 1.5, 10_000);
        assert!((t_sf(1.5, 3).unwrap() - (0.5 - cdf_part)).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(t_sf(1.0, 0).is_err());
        assert!(f_sf(-1.0, 1, 1).is_err());
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    proptest! {
        #[test]
        fn t_sf_symmetry(t in -50.0..50.0f64, dof in 1usize..200) {
            let s = t_sf(t, dof).unwrap() + t_sf(-t, dof).unwrap();
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
    }
}
