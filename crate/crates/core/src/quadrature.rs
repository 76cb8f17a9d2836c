//! Gauss-Jacobi rules from the Golub-Welsch eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Nodes and weights on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobi {
    pub fn new(m: usize, a: f64, b: f64) -> Result<Self> {
        if m == 0 || !(a > -1.0 && b > -1.0) {
            return Err(Error::InvalidParameter(format!("Gauss-Jacobi needs m >= 1, a, b > -1 (m={m}, a={a}, b={b})")));
        }
        let ab = a + b;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            let kf = k as f64;
            let diag =
                if k == 0 { (b - a) / (ab + 2.0) } else { (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0)) };
            jac[(k, k)] = diag;
            if k + 1 < m {
                let j = kf + 1.0;
                let num = 4.0 * j * (j + a) * (j + b) * (j + ab);
                let den = (2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0);
                let off = (num / den).sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> =
            (0..m).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(GaussJacobi {
            a,
            b,
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn legendre(m: usize) -> Self {
        Self::new(m, 0.0, 0.0).expect("valid Legendre parameters")
    }

    /// `sum w_i f(x_i)`, approximating `int_{-1}^{1} (1-x)^a (1+x)^b f(x) dx`.
    pub fn apply<T, F>(&self, f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: Fn(f64) -> T,
    {
        self.nodes.iter().zip(&self.weights).fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }
}

/// `int_0^1 sqrt(1 - u^k) du`, computed with a rule that absorbs the
/// square-root endpoint.
pub fn sqrt_one_minus_power_integral(k: u32) -> f64 {
    let rule = GaussJacobi::new(64, 0.5, 0.0).expect("valid rule");
    // u = (1+x)/2, 1 - u^k = (1-u) P(u) with P(u) = 1 + u + ... + u^(k-1).
    let total: f64 = rule.apply(|x| {
        let u = 0.5 * (1.0 + x);
        let p: f64 = (0..k).map(|j| u.powi(j as i32)).sum();
        p.sqrt()
    });
    total / 2f64.sqrt() / 2.0
}
