//! Fast solvers for `(Δ − K)v = f` on periodic and Dirichlet grids.
//!
//! Fields are stored row-major: node `(i, j)` lives at `j·nx + i`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Discrete Laplacian used on periodic grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Laplacian {
    /// Five-point stencil, diagonalised by the DFT. An M-matrix, so the
    /// discrete maximum principle holds exactly.
    #[default]
    FiniteDifference,
    /// Fourier multiplier `−|k|²`.
    Spectral,
}

fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Periodic `nx × ny` grid with periods `lx × ly`.
#[derive(Clone)]
pub struct PeriodicSolver {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    laplacian: Laplacian,
    eig: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicSolver")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("laplacian", &self.laplacian)
            .finish()
    }
}

/// Signed wave number of DFT index `k` on `n` points.
fn wave_index(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

impl PeriodicSolver {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, laplacian: Laplacian) -> Self {
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        let mut planner = FftPlanner::new();
        let ex: Vec<f64> = (0..nx).map(|k| Self::eig_1d(k, nx, hx, lx, laplacian)).collect();
        let ey: Vec<f64> = (0..ny).map(|k| Self::eig_1d(k, ny, hy, ly, laplacian)).collect();
        let mut eig = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                eig[j * nx + i] = ex[i] + ey[j];
            }
        }
        Self {
            nx,
            ny,
            hx,
            hy,
            laplacian,
            eig,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    fn eig_1d(k: usize, n: usize, h: f64, l: f64, lap: Laplacian) -> f64 {
        match lap {
            Laplacian::FiniteDifference => {
                let s = (PI * k as f64 / n as f64).sin();
                -4.0 * s * s / (h * h)
            }
            Laplacian::Spectral => {
                let w = 2.0 * PI * wave_index(k, n) / l;
                -w * w
            }
        }
    }

    pub fn laplacian(&self) -> Laplacian {
        self.laplacian
    }

    /// Eigenvalue of the discrete Laplacian for DFT mode `(kx, ky)`.
    pub fn eigenvalue(&self, kx: usize, ky: usize) -> f64 {
        self.eig[ky * self.nx + kx]
    }

    fn forward(&self, data: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = data.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fwd_x.process(&mut buf);
        let mut t = vec![Complex::new(0.0, 0.0); buf.len()];
        transpose(&buf, &mut t, self.ny, self.nx);
        self.fwd_y.process(&mut t);
        // kept transposed: index kx·ny + ky
        t
    }

    fn inverse(&self, mut t: Vec<Complex<f64>>) -> Vec<f64> {
        self.inv_y.process(&mut t);
        let mut buf = vec![Complex::new(0.0, 0.0); t.len()];
        transpose(&t, &mut buf, self.nx, self.ny);
        self.inv_x.process(&mut buf);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Apply a real multiplier `m(kx, ky)` in Fourier space.
    fn multiply<M: Fn(usize, usize) -> f64>(&self, data: &[f64], m: M) -> Vec<f64> {
        let mut t = self.forward(data);
        for kx in 0..self.nx {
            for ky in 0..self.ny {
                t[kx * self.ny + ky] *= m(kx, ky);
            }
        }
        self.inverse(t)
    }

    /// Solve `(Δ − k)v = rhs`. For `k = 0` the mean of `rhs` is discarded and `v` has mean zero.
    pub fn solve(&self, rhs: &[f64], k: f64) -> Vec<f64> {
        self.multiply(rhs, |kx, ky| {
            let d = self.eigenvalue(kx, ky) - k;
            if d == 0.0 {
                0.0
            } else {
                1.0 / d
            }
        })
    }

    /// The discrete Laplacian of `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self.laplacian {
            Laplacian::FiniteDifference => self.stencil(v),
            Laplacian::Spectral => self.multiply(v, |kx, ky| self.eigenvalue(kx, ky)),
        }
    }

    fn stencil(&self, v: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let cx = 1.0 / (self.hx * self.hx);
        let cy = 1.0 / (self.hy * self.hy);
        let mut out = vec![0.0; v.len()];
        for j in 0..ny {
            let jm = (j + ny - 1) % ny;
            let jp = (j + 1) % ny;
            for i in 0..nx {
                let im = (i + nx - 1) % nx;
                let ip = (i + 1) % nx;
                let c = v[j * nx + i];
                out[j * nx + i] = cx * (v[j * nx + im] + v[j * nx + ip] - 2.0 * c)
                    + cy * (v[jm * nx + i] + v[jp * nx + i] - 2.0 * c);
            }
        }
        out
    }
}

/// Homogeneous Dirichlet problem on the `n × n` interior nodes of a square with spacing `h`,
/// five-point stencil, diagonalised by the type-I sine transform.
#[derive(Clone)]
pub struct DirichletSolver {
    n: usize,
    h: f64,
    eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DirichletSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletSolver").field("n", &self.n).field("h", &self.h).finish()
    }
}

impl DirichletSolver {
    pub fn new(n: usize, h: f64) -> Self {
        let eig = (1..=n)
            .map(|k| {
                let s = (PI * k as f64 / (2.0 * (n as f64 + 1.0))).sin();
                -4.0 * s * s / (h * h)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            h,
            eig,
            fft: planner.plan_fft_forward(2 * (n + 1)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Unnormalised DST-I of every contiguous row of length `n`.
    fn dst_rows(&self, data: &mut [f64]) {
        let n = self.n;
        let m = 2 * (n + 1);
        let rows = data.len() / n;
        let mut buf = vec![Complex::new(0.0, 0.0); rows * m];
        for r in 0..rows {
            let row = &data[r * n..(r + 1) * n];
            let b = &mut buf[r * m..(r + 1) * m];
            for (j, &x) in row.iter().enumerate() {
                b[j + 1] = Complex::new(x, 0.0);
                b[m - 1 - j] = Complex::new(-x, 0.0);
            }
        }
        self.fft.process(&mut buf);
        for r in 0..rows {
            for k in 0..n {
                data[r * n + k] = -0.5 * buf[r * m + k + 1].im;
            }
        }
    }

    fn dst2(&self, data: &mut [f64]) {
        let n = self.n;
        self.dst_rows(data);
        let mut t = vec![0.0; data.len()];
        for r in 0..n {
            for c in 0..n {
                t[c * n + r] = data[r * n + c];
            }
        }
        self.dst_rows(&mut t);
        for r in 0..n {
            for c in 0..n {
                data[r * n + c] = t[c * n + r];
            }
        }
    }

    /// Solve `(Δ_h − k)v = rhs` with `v = 0` on the boundary; `k ≥ 0`.
    pub fn solve(&self, rhs: &[f64], k: f64) -> Vec<f64> {
        let n = self.n;
        let mut d = rhs.to_vec();
        self.dst2(&mut d);
        for j in 0..n {
            for i in 0..n {
                d[j * n + i] /= self.eig[i] + self.eig[j] - k;
            }
        }
        self.dst2(&mut d);
        let norm = (2.0 / (n as f64 + 1.0)).powi(2);
        d.iter_mut().for_each(|x| *x *= norm);
        d
    }

    /// Five-point Laplacian of interior values `v` with boundary values taken from `boundary(i, j)`
    /// for indices `−1` or `n`.
    pub fn apply<B: Fn(isize, isize) -> f64>(&self, v: &[f64], boundary: B) -> Vec<f64> {
        let n = self.n as isize;
        let c = 1.0 / (self.h * self.h);
        let at = |i: isize, j: isize| {
            if i < 0 || j < 0 || i >= n || j >= n {
                boundary(i, j)
            } else {
                v[(j * n + i) as usize]
            }
        };
        let mut out = vec![0.0; v.len()];
        for j in 0..n {
            for i in 0..n {
                out[(j * n + i) as usize] =
                    c * (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_single_mode() {
        let (nx, ny, l) = (32, 16, 3.0);
        for lap in [Laplacian::FiniteDifference, Laplacian::Spectral] {
            let s = PeriodicSolver::new(nx, ny, l, 2.0, lap);
            let h = l / nx as f64;
            let rhs: Vec<f64> = (0..nx * ny).map(|p| (2.0 * PI * (p % nx) as f64 * h / l).cos()).collect();
            let k = 1.5;
            let v = s.solve(&rhs, k);
            let lam = match lap {
                Laplacian::FiniteDifference => 4.0 / (h * h) * (PI / nx as f64).sin().powi(2),
                Laplacian::Spectral => (2.0 * PI / l).powi(2),
            };
            for (vi, ri) in v.iter().zip(&rhs) {
                assert!((vi + ri / (lam + k)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn periodic_constant_and_zero() {
        let s = PeriodicSolver::new(16, 16, 1.0, 1.0, Laplacian::FiniteDifference);
        let v = s.solve(&vec![2.0; 256], 4.0);
        assert!(v.iter().all(|x| (x + 0.5).abs() < 1e-15));
        let z = s.solve(&vec![0.0; 256], 4.0);
        assert!(z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn periodic_stencil_inverts_solve() {
        let s = PeriodicSolver::new(16, 24, 1.0, 1.5, Laplacian::FiniteDifference);
        let rhs: Vec<f64> = (0..16 * 24).map(|p| ((p * 37 % 11) as f64) - 5.0).collect();
        let v = s.solve(&rhs, 0.7);
        let lv = s.apply(&v);
        for p in 0..rhs.len() {
            assert!((lv[p] - 0.7 * v[p] - rhs[p]).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_stencil_inverts_solve() {
        let n = 15;
        let s = DirichletSolver::new(n, 0.1);
        let rhs: Vec<f64> = (0..n * n).map(|p| ((p * 13 % 7) as f64) - 3.0).collect();
        let v = s.solve(&rhs, 0.3);
        let lv = s.apply(&v, |_, _| 0.0);
        for p in 0..rhs.len() {
            assert!((lv[p] - 0.3 * v[p] - rhs[p]).abs() < 1e-10);
        }
    }
}
