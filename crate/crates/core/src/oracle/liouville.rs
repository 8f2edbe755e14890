//! Dense density-matrix storage and a sparse Lindblad right-hand side.
//!
//! The composite Hamiltonian splits into a real diagonal part (detunings and
//! dispersive shifts) and a sparse Hermitian coupling part (drive and TLS
//! exchange); every jump operator has O(dim) nonzeros. The right-hand side
//!
//! ```text
//!   dρ/dt = −i[H, ρ] + Σ_k ( P_k ρ P_k† − ½{P_k†P_k, ρ} )
//! ```
//!
//! (with P pre-scaled by √rate) then costs O(dim²) per evaluation: the
//! diagonal Hamiltonian and all ½{P†P, ρ} terms fuse into one elementwise
//! pass, the couplings stream rows and columns, and the sandwich terms pair
//! sparse entries directly.

use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone)]
pub(crate) struct CMat {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    /// ρ = |ψ⟩⟨ψ|.
    pub fn from_pure_state(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        Self { dim, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn diagonal_re(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    /// out = a + s*b
    pub fn scaled_add(a: &CMat, s: f64, b: &CMat, out: &mut CMat) {
        for ((o, x), y) in out.data.iter_mut().zip(&a.data).zip(&b.data) {
            *o = x + s * y;
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| self.data[i * d + j]);
        m.symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

/// Sparse operator as an entry list (row, col, value).
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseOp {
    pub entries: Vec<(u32, u32, Complex64)>,
}

impl SparseOp {
    pub fn push(&mut self, row: usize, col: usize, val: Complex64) {
        if val != Complex64::ZERO {
            self.entries.push((row as u32, col as u32, val));
        }
    }
}

/// Precomputed Lindblad generator.
#[derive(Debug, Clone)]
pub(crate) struct Liouvillian {
    pub dim: usize,
    /// coeff_ij = −i(hd_i − hd_j) − (dd_i + dd_j), the fused diagonal pass.
    coeff: Vec<Complex64>,
    /// Hermitian off-diagonal couplings (both triangles present).
    couplings: SparseOp,
    /// Jump operators pre-scaled by √rate.
    jumps: Vec<SparseOp>,
    spectral_radius: f64,
}

impl Liouvillian {
    /// Assemble from the diagonal Hamiltonian, Hermitian couplings, and
    /// pre-scaled jumps.
    pub fn new(ham_diag: Vec<f64>, couplings: SparseOp, jumps: Vec<SparseOp>) -> Self {
        let dim = ham_diag.len();
        // dd_i = ½ Σ_k (P_k† P_k)_ii
        let mut decay_diag = vec![0.0f64; dim];
        for jump in &jumps {
            for &(_, c, v) in &jump.entries {
                decay_diag[c as usize] += 0.5 * v.norm_sqr();
            }
        }
        let mut coeff = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                coeff[i * dim + j] = Complex64::new(
                    -(decay_diag[i] + decay_diag[j]),
                    -(ham_diag[i] - ham_diag[j]),
                );
            }
        }
        let hd_spread = ham_diag.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - ham_diag.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let mut row_sums = vec![0.0f64; dim];
        for &(r, _, v) in &couplings.entries {
            row_sums[r as usize] += v.norm();
        }
        let coupling_norm = row_sums.iter().fold(0.0f64, |a, &b| a.max(b));
        let dd_max = decay_diag.iter().fold(0.0f64, |a, &b| a.max(b));
        let spectral_radius = hd_spread + 2.0 * coupling_norm + 2.0 * dd_max;
        Self {
            dim,
            coeff,
            couplings,
            jumps,
            spectral_radius,
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    #[cfg(test)]
    pub(crate) fn jumps(&self) -> &[SparseOp] {
        &self.jumps
    }

    pub fn rhs(&self, rho: &CMat, out: &mut CMat) {
        let d = self.dim;
        for ((o, r), c) in out.data.iter_mut().zip(&rho.data).zip(&self.coeff) {
            *o = r * c;
        }
        for &(r, c, v) in &self.couplings.entries {
            let (r, c) = (r as usize, c as usize);
            // out[r, :] += (−i v) ρ[c, :]
            let miv = Complex64::new(v.im, -v.re);
            let (orow, rrow) = (
                &mut out.data[r * d..(r + 1) * d],
                &rho.data[c * d..(c + 1) * d],
            );
            for (o, x) in orow.iter_mut().zip(rrow) {
                *o += miv * x;
            }
            // out[:, c] += (i v) ρ[:, r]
            let iv = Complex64::new(-v.im, v.re);
            for i in 0..d {
                out.data[i * d + c] += iv * rho.data[i * d + r];
            }
        }
        for jump in &self.jumps {
            for &(r1, c1, v1) in &jump.entries {
                for &(r2, c2, v2) in &jump.entries {
                    out.data[r1 as usize * d + r2 as usize] +=
                        v1 * v2.conj() * rho.data[c1 as usize * d + c2 as usize];
                }
            }
        }
    }
}

/// Fixed-step RK4 propagator with preallocated stage storage.
pub(crate) struct Stepper {
    k1: CMat,
    k2: CMat,
    k3: CMat,
    k4: CMat,
    tmp: CMat,
}

impl Stepper {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: CMat::zeros(dim),
            k2: CMat::zeros(dim),
            k3: CMat::zeros(dim),
            k4: CMat::zeros(dim),
            tmp: CMat::zeros(dim),
        }
    }

    pub fn step(&mut self, gen: &Liouvillian, rho: &mut CMat, dt: f64) {
        gen.rhs(rho, &mut self.k1);
        CMat::scaled_add(rho, dt / 2.0, &self.k1, &mut self.tmp);
        gen.rhs(&self.tmp, &mut self.k2);
        CMat::scaled_add(rho, dt / 2.0, &self.k2, &mut self.tmp);
        gen.rhs(&self.tmp, &mut self.k3);
        CMat::scaled_add(rho, dt, &self.k3, &mut self.tmp);
        gen.rhs(&self.tmp, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..rho.data.len() {
            rho.data[i] += w
                * (self.k1.data[i]
                    + 2.0 * self.k2.data[i]
                    + 2.0 * self.k3.data[i]
                    + self.k4.data[i]);
        }
    }
}
