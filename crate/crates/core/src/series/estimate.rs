use std::fmt::Write;

use num_bigint::BigUint;
use num_traits::{Float, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Natural logarithm of a big integer, exact to floating precision.
fn ln_big(c: &BigUint) -> f64 {
    let bits = c.bits();
    if bits <= 1000 {
        return c.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (c >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectiveEstimate<F> {
    /// `c_n^(1/n)` for n = 1..=N.
    pub root: Vec<F>,
    /// `c_(n+1) / c_n` for n = 1..N.
    pub ratio: Vec<F>,
}

impl<F: Float> ConnectiveEstimate<F> {
    pub fn final_root(&self) -> Option<F> {
        self.root.last().copied()
    }

    pub fn final_ratio(&self) -> Option<F> {
        self.ratio.last().copied()
    }
}

/// Two estimates of the growth rate from `c_1..c_N`.
pub fn connective_estimate<F: Float>(coeffs: &[BigUint]) -> Result<ConnectiveEstimate<F>> {
    if let Some(n) = coeffs.iter().position(Zero::is_zero) {
        return Err(Error::Input(format!("coefficient c_{} is zero", n + 1)));
    }
    let logs: Vec<f64> = coeffs.iter().map(ln_big).collect();
    let cast = |x: f64| F::from(x).expect("float conversion");
    Ok(ConnectiveEstimate {
        root: logs
            .iter()
            .enumerate()
            .map(|(i, l)| cast((l / (i + 1) as f64).exp()))
            .collect(),
        ratio: logs.windows(2).map(|w| cast((w[1] - w[0]).exp())).collect(),
    })
}

/// `n, c_n, root estimate, ratio estimate` rows; the ratio on row n is
/// `c_n / c_(n-1)` and is `-` on the first row.
pub fn series_table(coeffs: &[BigUint]) -> Result<String> {
    let est = connective_estimate::<f64>(coeffs)?;
    let mut out = String::from("n\tc_n\troot_est\tratio_est\n");
    for (i, c) in coeffs.iter().enumerate() {
        let ratio = if i == 0 {
            "-".to_string()
        } else {
            format!("{:.6}", est.ratio[i - 1])
        };
        writeln!(out, "{}\t{}\t{:.6}\t{}", i + 1, c, est.root[i], ratio).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(c: &[u64]) -> Vec<BigUint> {
        c.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn roots_of_constant_two() {
        let e = connective_estimate::<f64>(&big(&[2, 2, 2, 2])).unwrap();
        let expected = [2.0, 2f64.sqrt(), 2f64.cbrt(), 2f64.powf(0.25)];
        for (a, b) in e.root.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_ratios() {
        let e = connective_estimate::<f32>(&big(&[3, 6, 12, 24])).unwrap();
        assert!(e.ratio.iter().all(|&r| (r - 2.0).abs() < 1e-6));
    }

    #[test]
    fn zero_is_rejected() {
        assert!(connective_estimate::<f64>(&big(&[1, 0])).is_err());
    }

    #[test]
    fn huge_coefficients() {
        let c = vec![BigUint::from(3u8).pow(2000), BigUint::from(3u8).pow(2001)];
        let e = connective_estimate::<f64>(&c).unwrap();
        assert!((e.ratio[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn table_layout() {
        let t = series_table(&big(&[2, 2])).unwrap();
        assert_eq!(
            t,
            "n\tc_n\troot_est\tratio_est\n1\t2\t2.000000\t-\n2\t2\t1.414214\t1.000000\n"
        );
    }
}
