use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::qasm_io::NoiseModel;

use super::sampling::MeasurementCounts;
use super::AnalysisError;

pub const MAX_MITIGATED_QUBITS: usize = 12;

/// Per-qubit confusion matrix: column = prepared bit, row = observed bit.
fn flip_matrix(p01: f64, p10: f64) -> [[f64; 2]; 2] {
    [[1.0 - p01, p10], [p01, 1.0 - p10]]
}

/// Full 2^m × 2^m calibration matrix; qubit k is bit k of the index.
pub fn calibration_matrix(readout: &[(f64, f64)]) -> DMatrix<f64> {
    let dim = 1usize << readout.len();
    DMatrix::from_fn(dim, dim, |obs, prep| {
        readout.iter().enumerate().fold(1.0, |acc, (k, &(p01, p10))| {
            let a = flip_matrix(p01, p10);
            acc * a[(obs >> k) & 1][(prep >> k) & 1]
        })
    })
}

/// Lawson-Hanson non-negative least squares: argmin ‖Ax − b‖ with x ≥ 0.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let tol = 1e-12 * a.norm().max(1.0);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let solve = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
        let sol = sub
            .svd(true, true)
            .solve(b, 1e-14)
            .expect("svd computed with u and v");
        let mut full = DVector::zeros(n);
        for (c, &j) in cols.iter().enumerate() {
            full[j] = sol[c];
        }
        full
    };
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let Some((t, _)) = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .map(|j| (j, w[j]))
            .max_by(|p, q| p.1.total_cmp(&q.1))
        else {
            break;
        };
        passive[t] = true;
        loop {
            let s = solve(&passive);
            if (0..n).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..n)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .map(|j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    x
}

/// Undo readout flips on a distribution over `qubits` (key bit k = `qubits[k]`).
pub fn mitigate_distribution(
    freqs: &BTreeMap<u64, f64>,
    qubits: &[usize],
    noise: &NoiseModel,
) -> Result<BTreeMap<u64, f64>, AnalysisError> {
    let m = qubits.len();
    if m > MAX_MITIGATED_QUBITS {
        return Err(AnalysisError::UnsupportedStructure(format!(
            "readout mitigation is limited to {MAX_MITIGATED_QUBITS} qubits, got {m}"
        )));
    }
    let readout: Vec<(f64, f64)> = qubits.iter().map(|&q| noise.readout(q)).collect();
    for (k, &(p01, p10)) in readout.iter().enumerate() {
        if (1.0 - p01 - p10).abs() < 1e-12 {
            return Err(AnalysisError::NonInvertibleReadout { qubit: qubits[k] });
        }
    }
    if readout.iter().all(|&(a, b)| a == 0.0 && b == 0.0) {
        return Ok(freqs.clone());
    }
    let dim = 1usize << m;
    let obs = DVector::from_fn(dim, |i, _| freqs.get(&(i as u64)).copied().unwrap_or(0.0));

    // Kronecker-factored inverse; exact whenever the answer is nonnegative.
    let mut v = obs.clone();
    for (k, &(p01, p10)) in readout.iter().enumerate() {
        let [[a, b], [c, d]] = flip_matrix(p01, p10);
        let det = a * d - b * c;
        let bit = 1usize << k;
        for i in 0..dim {
            if i & bit == 0 {
                let (v0, v1) = (v[i], v[i | bit]);
                v[i] = (d * v0 - b * v1) / det;
                v[i | bit] = (-c * v0 + a * v1) / det;
            }
        }
    }
    let p = if v.iter().all(|&x| x >= -1e-12) {
        v.map(|x| x.max(0.0))
    } else {
        nnls(&calibration_matrix(&readout), &obs)
    };
    let total = p.sum();
    Ok((0..dim)
        .filter(|&i| p[i] > 0.0)
        .map(|i| (i as u64, p[i] / total))
        .collect())
}

pub fn mitigate_readout(
    counts: &MeasurementCounts,
    noise: &NoiseModel,
) -> Result<BTreeMap<u64, f64>, AnalysisError> {
    mitigate_distribution(&counts.frequencies(), &counts.control_qubits, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(m: usize, c: &[(u64, u64)]) -> MeasurementCounts {
        MeasurementCounts {
            control_qubits: (0..m).collect(),
            counts: c.iter().copied().collect(),
            shots: c.iter().map(|x| x.1).sum(),
        }
    }

    #[test]
    fn noiseless_is_identity() {
        let c = counts(2, &[(0, 30), (3, 70)]);
        let p = mitigate_readout(&c, &NoiseModel::new()).unwrap();
        assert_eq!(p, c.frequencies());
    }

    #[test]
    fn single_qubit_linear_solve() {
        let noise = NoiseModel::new().with_readout_error(0, 0.0, 0.1);
        let c = counts(1, &[(0, 14), (1, 86)]);
        let p = mitigate_readout(&c, &noise).unwrap();
        // [[1,0.1],[0,0.9]] p = (0.14, 0.86)
        let p1 = 0.86 / 0.9;
        assert!((p[&1] - p1).abs() < 1e-12);
        assert!((p[&0] - (0.14 - 0.1 * p1)).abs() < 1e-12);
    }

    #[test]
    fn singular_calibration_rejected() {
        let noise = NoiseModel::new().with_readout_error(0, 0.5, 0.5);
        assert!(matches!(
            mitigate_readout(&counts(1, &[(0, 1)]), &noise),
            Err(AnalysisError::NonInvertibleReadout { qubit: 0 })
        ));
    }

    #[test]
    fn negative_solution_falls_back_to_nnls() {
        let noise = NoiseModel::new().with_readout_error(0, 0.2, 0.0);
        // observing 1 less often than p01 makes the direct inverse negative
        let c = counts(1, &[(0, 95), (1, 5)]);
        let p = mitigate_readout(&c, &noise).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[&0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_matches_unconstrained_when_feasible() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 2.0).abs() < 1e-10);
        let b = DVector::from_vec(vec![-1.0, 2.0, 1.0]);
        let x = nnls(&a, &b);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 1.5).abs() < 1e-10);
    }
}
