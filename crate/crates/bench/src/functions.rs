//! The four trivariate test tensors of the function-approximation study.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum FunctionId {
    #[serde(rename = "X1")]
    #[value(name = "X1")]
    X1,
    #[serde(rename = "X2")]
    #[value(name = "X2")]
    X2,
    #[serde(rename = "X3")]
    #[value(name = "X3")]
    X3,
    #[serde(rename = "X4")]
    #[value(name = "X4")]
    X4,
}

impl FunctionId {
    /// Grid for a nominal size `n`: a cube for X1, X2 and an `n × 4n/3 × n`
    /// box for X3, X4.
    pub fn dims(self, n: usize) -> Vec<usize> {
        match self {
            FunctionId::X1 | FunctionId::X2 => vec![n; 3],
            FunctionId::X3 | FunctionId::X4 => vec![n, (4 * n).div_ceil(3), n],
        }
    }

    pub fn default_n(self) -> usize {
        match self {
            FunctionId::X1 | FunctionId::X2 => 50,
            FunctionId::X3 | FunctionId::X4 => 60,
        }
    }

    /// Entry at the zero-based multi-index `idx` of a grid with extents `dims`.
    pub fn eval(self, dims: &[usize], idx: &[usize]) -> f64 {
        let one_based = idx.iter().map(|&i| (i + 1) as f64);
        match self {
            FunctionId::X1 => 1.0 / one_based.sum::<f64>(),
            FunctionId::X2 => {
                let p: f64 = idx
                    .iter()
                    .zip(dims)
                    .map(|(&i, &n)| -1.0 + 2.0 * i as f64 / (n.max(2) - 1) as f64)
                    .product();
                (-p * p).exp()
            }
            FunctionId::X3 => one_based.map(|v| v.powi(3)).sum::<f64>().powf(-1.0 / 3.0),
            FunctionId::X4 => one_based.map(|v| v.powi(5)).sum::<f64>().powf(-0.2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_values() {
        let dims = [5, 5, 5];
        assert_eq!(FunctionId::X1.eval(&dims, &[0, 0, 0]), 1.0 / 3.0);
        assert_eq!(FunctionId::X1.eval(&dims, &[4, 4, 4]), 1.0 / 15.0);
        // x = (-1, -1, 1): product -1
        assert!((FunctionId::X2.eval(&dims, &[0, 0, 4]) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((FunctionId::X2.eval(&dims, &[2, 0, 0]) - 1.0).abs() < 1e-15);
        assert!((FunctionId::X3.eval(&dims, &[1, 1, 1]) - 24f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!((FunctionId::X4.eval(&dims, &[0, 0, 0]) - 3f64.powf(-0.2)).abs() < 1e-15);
    }

    #[test]
    fn box_shapes() {
        assert_eq!(FunctionId::X2.dims(50), vec![50, 50, 50]);
        assert_eq!(FunctionId::X4.dims(300), vec![300, 400, 300]);
    }
}
