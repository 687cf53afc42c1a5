//! Lattice Pauli and magnetic Schrödinger operators.
//!
//! Kinetic part: (h²/a²) Σ_j [2ψ(x) − U_{x,j} ψ(x+e_j) − conj(U_{x−e_j,j}) ψ(x−e_j)]
//! with U_{x,j} = exp(i a A_j(x + a e_j/2)/h); A at link midpoints is the
//! average of the two site samples. The Pauli version adds +hσ·B on each site.
//! Dirichlet outside the grid.

use crate::error::{Error, Result};
use crate::fields::{norm3, VectorField};
use faer::{c64, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    /// 2-spinor (−ih∇+A)² + hσ·B.
    Pauli,
    /// Scalar (−ih∇+A)².
    Schrodinger,
}

/// Sparse Hermitian matrix in CSR form.
#[derive(Debug, Clone)]
pub struct Csr {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<c64>,
}

impl Csr {
    pub fn apply(&self, x: &[c64], y: &mut [c64]) {
        for i in 0..self.dim {
            let mut s = c64::new(0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[p] * x[self.col[p]];
            }
            y[i] = s;
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[p])] += self.val[p];
            }
        }
        m
    }

    /// Gershgorin bounds.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut d = 0.0;
            let mut r = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[p] == i {
                    d += self.val[p].re;
                } else {
                    r += self.val[p].norm();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.to_dense();
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max((d[(i, j)] - d[(j, i)].conj()).norm());
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct PauliGridOperator {
    pub kind: LatticeKind,
    pub h: f64,
    pub matrix: Csr,
    pub max_b: f64,
    pub spacing: f64,
}

pub fn build_pauli_grid(field: &VectorField, h: f64) -> Result<PauliGridOperator> {
    build_lattice(field, h, LatticeKind::Pauli)
}

pub fn build_lattice(field: &VectorField, h: f64, kind: LatticeKind) -> Result<PauliGridOperator> {
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("h must be positive, got {h}")));
    }
    if field.a.len() != field.grid.len() {
        return Err(Error::Invalid("field samples do not match grid".into()));
    }
    let g = &field.grid;
    let a = g.spacing;
    let t = h * h / (a * a);
    let ns = if kind == LatticeKind::Pauli { 2 } else { 1 };
    let b = field.curl();
    let max_b = b.iter().map(norm3).fold(0.0, f64::max);
    let n = g.len();
    let mut row_ptr = vec![0usize];
    let mut col = Vec::with_capacity(n * ns * 8);
    let mut val = Vec::with_capacity(n * ns * 8);
    for site in 0..n {
        for s in 0..ns {
            let mut entries: Vec<(usize, c64)> = Vec::with_capacity(8);
            let mut diag = c64::new(6.0 * t, 0.0);
            if kind == LatticeKind::Pauli {
                let bb = b[site];
                let sign = if s == 0 { 1.0 } else { -1.0 };
                diag += c64::new(sign * h * bb[2], 0.0);
                // σ·B off-diagonal: ⟨0|σ·B|1⟩ = Bx − iBy, ⟨1|σ·B|0⟩ = Bx + iBy
                let off = if s == 0 { c64::new(h * bb[0], -h * bb[1]) } else { c64::new(h * bb[0], h * bb[1]) };
                entries.push((site * ns + (1 - s), off));
            }
            entries.push((site * ns + s, diag));
            for d in 0..3 {
                if let Some(p) = g.neighbour(site, d, 1) {
                    let am = 0.5 * (field.a[site][d] + field.a[p][d]);
                    let u = c64::from_polar(1.0, a * am / h);
                    entries.push((p * ns + s, -u * t));
                }
                if let Some(m) = g.neighbour(site, d, -1) {
                    let am = 0.5 * (field.a[site][d] + field.a[m][d]);
                    let u = c64::from_polar(1.0, a * am / h);
                    entries.push((m * ns + s, -u.conj() * t));
                }
            }
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
    }
    Ok(PauliGridOperator {
        kind,
        h,
        matrix: Csr { dim: n * ns, row_ptr, col, val },
        max_b,
        spacing: a,
    })
}

impl PauliGridOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn spin_components(&self) -> usize {
        if self.kind == LatticeKind::Pauli { 2 } else { 1 }
    }

    /// Site potential expanded to the spinor dimension.
    pub fn expand_potential(&self, v_sites: &[f64]) -> Vec<f64> {
        let ns = self.spin_components();
        v_sites.iter().flat_map(|&v| std::iter::repeat_n(v, ns)).collect()
    }

    /// Magnetic length √(h/max|B|).
    pub fn magnetic_length(&self) -> f64 {
        if self.max_b > 0.0 { (self.h / self.max_b).sqrt() } else { f64::INFINITY }
    }
}
