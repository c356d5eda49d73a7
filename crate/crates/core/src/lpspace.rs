//! Complex functions on the stored vertices and the weighted `L^p` structure.
//!
//! The inner product conjugates its second argument, so `inner(f, f)` is
//! `norm_p(f, _, 2)^2` for complex `f`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Tree, VertexId};
use crate::weight::Weight;

/// Lebesgue exponent `1 <= p < inf`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);

    pub fn new(p: f64) -> Result<Exponent> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_hilbert(self) -> bool {
        self.0 == 2.0
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeFunction {
    values: Vec<Complex64>,
}

impl TreeFunction {
    pub fn zeros(len: usize) -> TreeFunction {
        TreeFunction {
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn constant(len: usize, c: Complex64) -> TreeFunction {
        TreeFunction { values: vec![c; len] }
    }

    pub fn from_values(values: Vec<Complex64>) -> TreeFunction {
        TreeFunction { values }
    }

    pub fn from_real(values: &[f64]) -> TreeFunction {
        TreeFunction {
            values: values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, v: VertexId) -> Complex64 {
        self.values[v.index()]
    }

    pub fn scale(&self, s: Complex64) -> TreeFunction {
        TreeFunction {
            values: self.values.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &TreeFunction) -> TreeFunction {
        TreeFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &TreeFunction) -> TreeFunction {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }
}

/// `[sum_v |f(v)|^p weight(v)]^(1/p)`.
pub fn norm_p(f: &TreeFunction, weight: &Weight, p: Exponent) -> f64 {
    let p = p.value();
    let sum: f64 = f
        .values
        .iter()
        .zip(weight.values())
        .map(|(x, w)| {
            if p == 2.0 {
                x.norm_sqr() * w
            } else {
                x.norm().powf(p) * w
            }
        })
        .sum();
    sum.powf(1.0 / p)
}

/// `sum_v f(v) conj(g(v)) weight(v)`.
pub fn inner(f: &TreeFunction, g: &TreeFunction, weight: &Weight) -> Complex64 {
    f.values
        .iter()
        .zip(&g.values)
        .zip(weight.values())
        .map(|((a, b), w)| a * b.conj() * w)
        .sum()
}

/// Normalized indicator `f_v = weight(v)^(-1/p) * chi_v`.
pub fn basis_vector(tree: &Tree, weight: &Weight, v: VertexId, p: Exponent) -> TreeFunction {
    let mut f = TreeFunction::zeros(tree.len());
    f.values[v.index()] = Complex64::new(point_eval_norm(weight, v, p), 0.0);
    f
}

/// Norm of `f -> f(v)`: `weight(v)^(-1/p)`, attained by the basis vector at `v`.
pub fn point_eval_norm(weight: &Weight, v: VertexId, p: Exponent) -> f64 {
    weight.at(v).powf(-1.0 / p.value())
}

/// Truncation projection: keeps values at depth `<= n`, zeroes the rest.
pub fn project(tree: &Tree, f: &TreeFunction, n: usize) -> TreeFunction {
    TreeFunction {
        values: f
            .values
            .iter()
            .zip(tree.depths())
            .map(|(&x, &d)| if d <= n { x } else { Complex64::new(0.0, 0.0) })
            .collect(),
    }
}
