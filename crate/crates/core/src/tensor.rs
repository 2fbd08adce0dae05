//! Even-order tensors under the Einstein product, stored as their square unfolding.
//!
//! A tensor of shape `I_1 x ... x I_N x I_1 x ... x I_N` is held as a `D x D`
//! complex matrix with `D = I_1 * ... * I_N`. Multi-indices are linearised in
//! row-major order (`i_1` most significant), so the entry `X[i_1..i_N, j_1..j_N]`
//! lives at row `lin(i)` and column `lin(j)`. With this layout the Einstein
//! product is exactly the matrix product of the unfoldings.

use std::fs;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Mode sizes `(I_1, ..., I_N)` of the "row half" of an even-order tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TensorShape {
    modes: Vec<usize>,
    dim: usize,
}

impl TensorShape {
    pub fn new(modes: Vec<usize>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidShape("at least one mode is required".into()));
        }
        if let Some(pos) = modes.iter().position(|&m| m == 0) {
            return Err(Error::InvalidShape(format!("mode {pos} has size zero")));
        }
        let dim = modes
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| Error::InvalidShape(format!("{modes:?} overflows")))?;
        Ok(TensorShape { modes, dim })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn order(&self) -> usize {
        self.modes.len()
    }

    /// `D`, the side length of the unfolding.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major linear index of a multi-index.
    pub fn linear_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.modes.len() {
            return Err(Error::InvalidShape(format!(
                "multi-index {multi:?} has {} entries, shape has {} modes",
                multi.len(),
                self.modes.len()
            )));
        }
        let mut lin = 0;
        for (&i, &m) in multi.iter().zip(&self.modes) {
            if i >= m {
                return Err(Error::IndexOutOfRange { index: i, dim: m });
            }
            lin = lin * m + i;
        }
        Ok(lin)
    }

    /// Inverse of [`TensorShape::linear_index`].
    pub fn multi_index(&self, mut lin: usize) -> Result<Vec<usize>> {
        if lin >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: lin,
                dim: self.dim,
            });
        }
        let mut out = vec![0; self.modes.len()];
        for (slot, &m) in out.iter_mut().zip(&self.modes).rev() {
            *slot = lin % m;
            lin /= m;
        }
        Ok(out)
    }
}

impl TryFrom<Vec<usize>> for TensorShape {
    type Error = Error;
    fn try_from(modes: Vec<usize>) -> Result<Self> {
        TensorShape::new(modes)
    }
}

impl From<TensorShape> for Vec<usize> {
    fn from(s: TensorShape) -> Vec<usize> {
        s.modes
    }
}

/// Even-order complex tensor, held as its `D x D` unfolding.
#[derive(Clone, Debug, PartialEq)]
pub struct EinsteinTensor {
    shape: TensorShape,
    data: DMatrix<C64>,
}

impl EinsteinTensor {
    pub fn zeros(shape: &TensorShape) -> Self {
        let d = shape.dim();
        EinsteinTensor {
            shape: shape.clone(),
            data: DMatrix::zeros(d, d),
        }
    }

    /// The Einstein-product identity `I[i, j] = prod_k delta(i_k, j_k)`.
    pub fn identity(shape: &TensorShape) -> Self {
        let d = shape.dim();
        EinsteinTensor {
            shape: shape.clone(),
            data: DMatrix::identity(d, d),
        }
    }

    /// Fold a `D x D` matrix back into a tensor of the given shape.
    pub fn from_unfolded(shape: &TensorShape, data: DMatrix<C64>) -> Result<Self> {
        let d = shape.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::InvalidShape(format!(
                "unfolding is {}x{}, shape {:?} needs {d}x{d}",
                data.nrows(),
                data.ncols(),
                shape.modes()
            )));
        }
        Ok(EinsteinTensor {
            shape: shape.clone(),
            data,
        })
    }

    /// Build from `D^2` entries in row-major order.
    pub fn from_entries(shape: &TensorShape, entries: &[C64]) -> Result<Self> {
        let d = shape.dim();
        if entries.len() != d * d {
            return Err(Error::InvalidShape(format!(
                "expected {} entries for shape {:?}, got {}",
                d * d,
                shape.modes(),
                entries.len()
            )));
        }
        Ok(EinsteinTensor {
            shape: shape.clone(),
            data: DMatrix::from_row_slice(d, d, entries),
        })
    }

    /// Real diagonal tensor `sum_i values[i] E_ii` in the standard basis.
    pub fn diagonal(shape: &TensorShape, values: &[f64]) -> Result<Self> {
        if values.len() != shape.dim() {
            return Err(Error::InvalidShape(format!(
                "expected {} diagonal values, got {}",
                shape.dim(),
                values.len()
            )));
        }
        let mut t = EinsteinTensor::zeros(shape);
        for (i, &v) in values.iter().enumerate() {
            t.data[(i, i)] = C64::new(v, 0.0);
        }
        Ok(t)
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// The `D x D` unfolding.
    pub fn unfold(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_unfolded(self) -> DMatrix<C64> {
        self.data
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                out.push(self.data[(r, c)]);
            }
        }
        out
    }

    /// Entry at row multi-index `i` and column multi-index `j`.
    pub fn get(&self, i: &[usize], j: &[usize]) -> Result<C64> {
        let r = self.shape.linear_index(i)?;
        let c = self.shape.linear_index(j)?;
        Ok(self.data[(r, c)])
    }

    pub fn set(&mut self, i: &[usize], j: &[usize], value: C64) -> Result<()> {
        let r = self.shape.linear_index(i)?;
        let c = self.shape.linear_index(j)?;
        self.data[(r, c)] = value;
        Ok(())
    }

    fn check_same(&self, other: &EinsteinTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.modes().to_vec(),
                right: other.shape.modes().to_vec(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &EinsteinTensor) -> Result<EinsteinTensor> {
        self.check_same(other)?;
        Ok(self.with_data(&self.data + &other.data))
    }

    pub fn sub(&self, other: &EinsteinTensor) -> Result<EinsteinTensor> {
        self.check_same(other)?;
        Ok(self.with_data(&self.data - &other.data))
    }

    pub fn scale(&self, s: C64) -> EinsteinTensor {
        self.with_data(&self.data * s)
    }

    pub fn scale_real(&self, s: f64) -> EinsteinTensor {
        self.scale(C64::new(s, 0.0))
    }

    /// Einstein product `(X * Y)[i, k] = sum_j X[i, j] Y[j, k]`.
    pub fn einstein_product(&self, other: &EinsteinTensor) -> Result<EinsteinTensor> {
        self.check_same(other)?;
        Ok(self.with_data(&self.data * &other.data))
    }

    /// Conjugate transpose `X^H[i, j] = conj(X[j, i])`.
    pub fn adjoint(&self) -> EinsteinTensor {
        self.with_data(self.data.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entry of `|X - X^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Default tolerance for the Hermitian check: `1e-10 * (1 + max |entry|)`.
    pub fn default_hermitian_tolerance(&self) -> f64 {
        1e-10 * (1.0 + self.max_abs_entry())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let tolerance = self.default_hermitian_tolerance();
        let asymmetry = self.hermitian_defect();
        if asymmetry > tolerance {
            return Err(Error::NotHermitian {
                asymmetry,
                tolerance,
            });
        }
        Ok(())
    }

    /// `(X + X^H) / 2`.
    pub fn hermitian_part(&self) -> EinsteinTensor {
        self.with_data((&self.data + self.data.adjoint()) * C64::new(0.5, 0.0))
    }

    fn with_data(&self, data: DMatrix<C64>) -> EinsteinTensor {
        EinsteinTensor {
            shape: self.shape.clone(),
            data,
        }
    }

    pub fn to_file_format(&self) -> TensorFile {
        TensorFile {
            modes: self.shape.modes().to_vec(),
            entries: self.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_file_format()).expect("tensor serialises");
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_json(path: &Path) -> Result<EinsteinTensor> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: TensorFile = serde_json::from_str(&text).map_err(|e| Error::TensorFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        file.to_tensor().map_err(|e| Error::TensorFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// On-disk JSON form: `{"modes": [..], "entries": [[re, im], ...]}` with the
/// `D^2` entries listed in row-major order of the unfolding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub modes: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl TensorFile {
    pub fn to_tensor(&self) -> Result<EinsteinTensor> {
        let shape = TensorShape::new(self.modes.clone())?;
        if let Some(pos) = self
            .entries
            .iter()
            .position(|e| !e[0].is_finite() || !e[1].is_finite())
        {
            return Err(Error::InvalidParameter(format!("entry {pos} is not finite")));
        }
        let entries: Vec<C64> = self.entries.iter().map(|e| C64::new(e[0], e[1])).collect();
        EinsteinTensor::from_entries(&shape, &entries)
    }
}

/// Reference Einstein product computed by explicit multi-index summation.
///
/// Loops over every `(i, j, k)` triple of multi-indices; only meant as an
/// oracle for the unfolded product.
pub fn einstein_product_naive(x: &EinsteinTensor, y: &EinsteinTensor) -> Result<EinsteinTensor> {
    x.check_same(y)?;
    let shape = x.shape();
    let d = shape.dim();
    let multis: Vec<Vec<usize>> = (0..d).map(|l| shape.multi_index(l)).collect::<Result<_>>()?;
    let mut out = EinsteinTensor::zeros(shape);
    for i in &multis {
        for k in &multis {
            let mut acc = C64::new(0.0, 0.0);
            for j in &multis {
                acc += x.get(i, j)? * y.get(j, k)?;
            }
            out.set(i, k, acc)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn shape_rejects_zero_and_empty() {
        assert!(TensorShape::new(vec![]).is_err());
        assert!(TensorShape::new(vec![2, 0]).is_err());
        assert_eq!(TensorShape::new(vec![2, 3]).unwrap().dim(), 6);
    }

    #[test]
    fn linear_index_is_row_major() {
        let s = TensorShape::new(vec![2, 3]).unwrap();
        assert_eq!(s.linear_index(&[0, 0]).unwrap(), 0);
        assert_eq!(s.linear_index(&[0, 2]).unwrap(), 2);
        assert_eq!(s.linear_index(&[1, 0]).unwrap(), 3);
        assert_eq!(s.linear_index(&[1, 2]).unwrap(), 5);
        for l in 0..6 {
            assert_eq!(s.linear_index(&s.multi_index(l).unwrap()).unwrap(), l);
        }
        assert!(s.linear_index(&[2, 0]).is_err());
    }

    #[test]
    fn order_one_tensor_is_a_matrix() {
        let s = TensorShape::new(vec![2]).unwrap();
        let x = EinsteinTensor::from_entries(&s, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        let y = EinsteinTensor::from_entries(&s, &[c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let p = x.einstein_product(&y).unwrap();
        // [[1,2],[3,4]] * [[i,1],[1,0]] = [[i+2, 1], [3i+4, 3]]
        assert_eq!(p.get(&[0], &[0]).unwrap(), c(2.0, 1.0));
        assert_eq!(p.get(&[0], &[1]).unwrap(), c(1.0, 0.0));
        assert_eq!(p.get(&[1], &[0]).unwrap(), c(4.0, 3.0));
        assert_eq!(p.get(&[1], &[1]).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn identity_is_neutral_and_matches_deltas() {
        let s = TensorShape::new(vec![2, 2]).unwrap();
        let id = EinsteinTensor::identity(&s);
        for a in 0..4 {
            for b in 0..4 {
                let i = s.multi_index(a).unwrap();
                let j = s.multi_index(b).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(id.get(&i, &j).unwrap(), c(expected, 0.0));
            }
        }
        let entries: Vec<C64> = (0..16).map(|k| c(k as f64, -(k as f64) / 3.0)).collect();
        let x = EinsteinTensor::from_entries(&s, &entries).unwrap();
        assert_eq!(x.einstein_product(&id).unwrap(), x);
        assert_eq!(id.einstein_product(&x).unwrap(), x);
    }

    #[test]
    fn naive_product_agrees_on_mixed_shape() {
        let s = TensorShape::new(vec![2, 3]).unwrap();
        let ex: Vec<C64> = (0..36).map(|k| c((k as f64).sin(), (k as f64).cos())).collect();
        let ey: Vec<C64> = (0..36).map(|k| c((k as f64 * 0.7).cos(), 0.3 * k as f64)).collect();
        let x = EinsteinTensor::from_entries(&s, &ex).unwrap();
        let y = EinsteinTensor::from_entries(&s, &ey).unwrap();
        let fast = x.einstein_product(&y).unwrap();
        let slow = einstein_product_naive(&x, &y).unwrap();
        assert!((fast.unfold() - slow.unfold()).norm() < 1e-12 * fast.frobenius_norm());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = EinsteinTensor::zeros(&TensorShape::new(vec![2, 3]).unwrap());
        let b = EinsteinTensor::zeros(&TensorShape::new(vec![3, 2]).unwrap());
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch { .. })));
        assert!(a.einstein_product(&b).is_err());
    }

    #[test]
    fn hermitian_check_uses_relative_tolerance() {
        let s = TensorShape::new(vec![2]).unwrap();
        let h = EinsteinTensor::from_entries(&s, &[c(1.0, 0.0), c(2.0, 1.0), c(2.0, -1.0), c(3.0, 0.0)])
            .unwrap();
        assert!(h.ensure_hermitian().is_ok());
        let nh = EinsteinTensor::from_entries(&s, &[c(1.0, 0.0), c(2.0, 1.0), c(2.0, 1.0), c(3.0, 0.0)])
            .unwrap();
        assert!(matches!(nh.ensure_hermitian(), Err(Error::NotHermitian { .. })));
        assert!(nh.hermitian_part().ensure_hermitian().is_ok());
    }

    #[test]
    fn file_round_trip_and_length_validation() {
        let dir = std::env::temp_dir().join(format!("dti-tensor-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let s = TensorShape::new(vec![2, 2]).unwrap();
        let entries: Vec<C64> = (0..16).map(|k| c(k as f64 * 0.25, 1.0 - k as f64)).collect();
        let x = EinsteinTensor::from_entries(&s, &entries).unwrap();
        let p = dir.join("x.json");
        x.save_json(&p).unwrap();
        assert_eq!(EinsteinTensor::load_json(&p).unwrap(), x);

        let bad = dir.join("bad.json");
        fs::write(&bad, r#"{"modes":[2,2],"entries":[[1,0],[2,0]]}"#).unwrap();
        let err = EinsteinTensor::load_json(&bad).unwrap_err();
        assert!(err.to_string().contains("bad.json"), "{err}");
        fs::write(&bad, "not json").unwrap();
        assert!(matches!(EinsteinTensor::load_json(&bad), Err(Error::TensorFile { .. })));
        fs::remove_dir_all(&dir).ok();
    }
}
