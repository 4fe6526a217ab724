//! Fourier representation of real scalar fields on the periodic box [0,2)^3.
//!
//! Conventions used throughout the crate:
//!
//! ```text
//! f(x,y,z) = sum_k  c_k  exp(i*pi*(kx*x + ky*y + kz*z)),   period 2 per direction,
//! ```
//!
//! so the wavenumber of integer mode k is pi*k, and grid point j of an
//! n-point direction sits at 2j/n. Real fields carry Hermitian symmetry
//! c(-k) = conj(c(k)). Fields are additionally tagged with their symmetry
//! class in z (even or odd), which the solvers preserve exactly.
//!
//! Sobolev norms include the box volume |O| = 8:
//!
//! ```text
//! ||f||_{H^s}^2 = 8 * sum_k (1 + pi^2*|k|^2)^s |c_k|^2,
//! ```
//!
//! which for s = 0 coincides with the integral L^2 norm.

mod fft;
mod horizontal;

pub use horizontal::{gradient_h, AxisH, HorizontalField};

use crate::error::CoreError;
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Symmetry class of a field in the vertical variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    EvenZ,
    OddZ,
    None,
}

impl Parity {
    /// Parity of a pointwise product.
    pub fn combine(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::EvenZ, Parity::EvenZ) | (Parity::OddZ, Parity::OddZ) => Parity::EvenZ,
            (Parity::EvenZ, Parity::OddZ) | (Parity::OddZ, Parity::EvenZ) => Parity::OddZ,
            _ => Parity::None,
        }
    }

    fn flip(self) -> Parity {
        match self {
            Parity::EvenZ => Parity::OddZ,
            Parity::OddZ => Parity::EvenZ,
            Parity::None => Parity::None,
        }
    }
}

/// Spatial axis of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis3 {
    X,
    Y,
    Z,
}

/// Uniform collocation grid on the period-2 box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Grid {
    /// Volume of the box [0,2)^3.
    pub const VOLUME: f64 = 8.0;

    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Grid, CoreError> {
        let ok = |n: usize| n >= 4 && n % 2 == 0;
        if ok(nx) && ok(ny) && ok(nz) {
            Ok(Grid { nx, ny, nz })
        } else {
            Err(CoreError::BadGrid(nx, ny, nz))
        }
    }

    pub fn cube(n: usize) -> Result<Grid, CoreError> {
        Grid::new(n, n, n)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed integer mode of storage index `i` in an `n`-point direction.
    pub fn mode_of(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Storage index of signed mode `k`; `k` must satisfy -n/2 <= k < n/2.
    pub fn index_of(k: i64, n: usize) -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + n as i64) as usize
        }
    }

    /// Physical coordinate of grid point `j` in an `n`-point direction.
    pub fn coordinate(j: usize, n: usize) -> f64 {
        2.0 * j as f64 / n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        Grid::VOLUME / self.len() as f64
    }
}

/// Fourier coefficients of a real scalar field, tagged with z-parity.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array3<Complex64>,
    parity: Parity,
}

impl SpectralField {
    pub fn zeros(grid: Grid, parity: Parity) -> SpectralField {
        SpectralField {
            grid,
            coeffs: Array3::zeros(grid.shape()),
            parity,
        }
    }

    /// Forward transform of physical samples. The result carries no parity
    /// tag; use [`SpectralField::project_parity`] to assert a symmetry class.
    pub fn from_physical(grid: Grid, values: &Array3<f64>) -> Result<SpectralField, CoreError> {
        let got = values.dim();
        if got != grid.shape() {
            return Err(CoreError::ShapeMismatch {
                expected: grid.shape(),
                got,
            });
        }
        Ok(Self::from_physical_unchecked(grid, values, Parity::None))
    }

    pub(crate) fn from_coeffs(
        grid: Grid,
        coeffs: Array3<Complex64>,
        parity: Parity,
    ) -> SpectralField {
        debug_assert_eq!(coeffs.dim(), grid.shape());
        SpectralField {
            grid,
            coeffs,
            parity,
        }
    }

    pub(crate) fn from_physical_unchecked(
        grid: Grid,
        values: &Array3<f64>,
        parity: Parity,
    ) -> SpectralField {
        let mut coeffs = values.mapv(|v| Complex64::new(v, 0.0));
        fft::fft3(&mut coeffs, true);
        let scale = 1.0 / grid.len() as f64;
        coeffs.mapv_inplace(|c| c * scale);
        SpectralField {
            grid,
            coeffs,
            parity,
        }
    }

    /// Evaluate `f(x,y,z)` on the grid, transform, and force the declared
    /// parity exactly by projection.
    pub fn from_fn(grid: Grid, parity: Parity, f: impl Fn(f64, f64, f64) -> f64) -> SpectralField {
        let (nx, ny, nz) = grid.shape();
        let mut values = Array3::zeros((nx, ny, nz));
        for ix in 0..nx {
            let x = Grid::coordinate(ix, nx);
            for iy in 0..ny {
                let y = Grid::coordinate(iy, ny);
                for iz in 0..nz {
                    let z = Grid::coordinate(iz, nz);
                    values[[ix, iy, iz]] = f(x, y, z);
                }
            }
        }
        let field = Self::from_physical_unchecked(grid, &values, Parity::None);
        match parity {
            Parity::None => field,
            p => field.project_parity(p),
        }
    }

    /// Inverse transform to physical samples on the grid.
    pub fn to_physical(&self) -> Array3<f64> {
        let mut buf = self.coeffs.clone();
        fft::fft3(&mut buf, false);
        buf.mapv(|c| c.re)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn coeffs(&self) -> &Array3<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.coeffs
    }

    /// Coefficient of signed mode (kx, ky, kz).
    pub fn mode(&self, kx: i64, ky: i64, kz: i64) -> Complex64 {
        self.coeffs[[
            Grid::index_of(kx, self.grid.nx),
            Grid::index_of(ky, self.grid.ny),
            Grid::index_of(kz, self.grid.nz),
        ]]
    }

    /// Set mode k to `value` and mode -k to its conjugate, preserving the
    /// realness of the field.
    pub fn set_mode_pair(&mut self, kx: i64, ky: i64, kz: i64, value: Complex64) {
        let ix = Grid::index_of(kx, self.grid.nx);
        let iy = Grid::index_of(ky, self.grid.ny);
        let iz = Grid::index_of(kz, self.grid.nz);
        self.coeffs[[ix, iy, iz]] = value;
        let jx = Grid::index_of(-kx, self.grid.nx);
        let jy = Grid::index_of(-ky, self.grid.ny);
        let jz = Grid::index_of(-kz, self.grid.nz);
        if (jx, jy, jz) != (ix, iy, iz) {
            self.coeffs[[jx, jy, jz]] = value.conj();
        }
    }

    /// Spectral derivative along `axis` of the given order: multiplication by
    /// (i*pi*k)^order. Odd z-orders flip the parity tag.
    pub fn derivative(&self, axis: Axis3, order: u32) -> SpectralField {
        let (nx, ny, nz) = self.grid.shape();
        let mut out = self.coeffs.clone();
        let pow = |k: i64| Complex64::new(0.0, PI * k as f64).powu(order);
        match axis {
            Axis3::X => {
                for ix in 0..nx {
                    let factor = pow(Grid::mode_of(ix, nx));
                    out.slice_mut(ndarray::s![ix, .., ..])
                        .mapv_inplace(|c| c * factor);
                }
            }
            Axis3::Y => {
                for iy in 0..ny {
                    let factor = pow(Grid::mode_of(iy, ny));
                    out.slice_mut(ndarray::s![.., iy, ..])
                        .mapv_inplace(|c| c * factor);
                }
            }
            Axis3::Z => {
                for iz in 0..nz {
                    let factor = pow(Grid::mode_of(iz, nz));
                    out.slice_mut(ndarray::s![.., .., iz])
                        .mapv_inplace(|c| c * factor);
                }
            }
        }
        let parity = if axis == Axis3::Z && order % 2 == 1 {
            self.parity.flip()
        } else {
            self.parity
        };
        SpectralField {
            grid: self.grid,
            coeffs: out,
            parity,
        }
    }

    /// Laplacian in all three directions.
    pub fn laplacian(&self) -> SpectralField {
        let mut out = self.clone();
        self.for_each_mode(|k, c| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            out.coeffs[[
                Grid::index_of(k[0], self.grid.nx),
                Grid::index_of(k[1], self.grid.ny),
                Grid::index_of(k[2], self.grid.nz),
            ]] = c * (-PI * PI * k2);
        });
        out
    }

    /// Horizontal Laplacian (x and y only).
    pub fn laplacian_h(&self) -> SpectralField {
        let mut out = self.clone();
        self.for_each_mode(|k, c| {
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            out.coeffs[[
                Grid::index_of(k[0], self.grid.nx),
                Grid::index_of(k[1], self.grid.ny),
                Grid::index_of(k[2], self.grid.nz),
            ]] = c * (-PI * PI * k2);
        });
        out
    }

    fn for_each_mode(&self, mut f: impl FnMut([i64; 3], Complex64)) {
        let (nx, ny, nz) = self.grid.shape();
        for ix in 0..nx {
            let kx = Grid::mode_of(ix, nx);
            for iy in 0..ny {
                let ky = Grid::mode_of(iy, ny);
                for iz in 0..nz {
                    let kz = Grid::mode_of(iz, nz);
                    f([kx, ky, kz], self.coeffs[[ix, iy, iz]]);
                }
            }
        }
    }

    /// H^s norm with the |O| = 8 volume factor; s = 0 is the L^2 norm.
    pub fn hs_norm(&self, s: u32) -> f64 {
        let (nx, ny, nz) = self.grid.shape();
        let mut sum = 0.0;
        for ix in 0..nx {
            let kx = Grid::mode_of(ix, nx) as f64;
            for iy in 0..ny {
                let ky = Grid::mode_of(iy, ny) as f64;
                for iz in 0..nz {
                    let kz = Grid::mode_of(iz, nz) as f64;
                    let k2 = PI * PI * (kx * kx + ky * ky + kz * kz);
                    let weight = (1.0 + k2).powi(s as i32);
                    sum += weight * self.coeffs[[ix, iy, iz]].norm_sqr();
                }
            }
        }
        (Grid::VOLUME * sum).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.hs_norm(0)
    }

    /// Projection onto the requested symmetry class in z. Idempotent, and
    /// `project(Even) + project(Odd)` reproduces the field exactly.
    pub fn project_parity(&self, parity: Parity) -> SpectralField {
        assert!(parity != Parity::None, "project_parity needs Even or Odd");
        let (nx, ny, nz) = self.grid.shape();
        let mut out = Array3::zeros((nx, ny, nz));
        let sign = if parity == Parity::EvenZ { 1.0 } else { -1.0 };
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let jz = (nz - iz) % nz;
                    let c = self.coeffs[[ix, iy, iz]];
                    let m = self.coeffs[[ix, iy, jz]];
                    out[[ix, iy, iz]] = 0.5 * (c + sign * m);
                }
            }
        }
        SpectralField {
            grid: self.grid,
            coeffs: out,
            parity,
        }
    }

    /// 2/3-rule truncation: zero every mode with |k| > floor(n/3) in any
    /// direction. Idempotent.
    pub fn dealias(&self) -> SpectralField {
        let (nx, ny, nz) = self.grid.shape();
        let (cx, cy, cz) = (nx as i64 / 3, ny as i64 / 3, nz as i64 / 3);
        let mut out = self.coeffs.clone();
        for ix in 0..nx {
            let kx = Grid::mode_of(ix, nx).abs();
            for iy in 0..ny {
                let ky = Grid::mode_of(iy, ny).abs();
                for iz in 0..nz {
                    let kz = Grid::mode_of(iz, nz).abs();
                    if kx > cx || ky > cy || kz > cz {
                        out[[ix, iy, iz]] = Complex64::ZERO;
                    }
                }
            }
        }
        SpectralField {
            grid: self.grid,
            coeffs: out,
            parity: self.parity,
        }
    }

    /// Vertical average over [0,1], valid for even fields where it equals the
    /// kz = 0 Fourier slice, returned as a z-independent 3-D field.
    pub fn vertical_average(&self) -> Result<SpectralField, CoreError> {
        if self.parity != Parity::EvenZ {
            return Err(CoreError::ParityContract(self.parity));
        }
        let (nx, ny, nz) = self.grid.shape();
        let mut out = Array3::zeros((nx, ny, nz));
        for ix in 0..nx {
            for iy in 0..ny {
                out[[ix, iy, 0]] = self.coeffs[[ix, iy, 0]];
            }
        }
        Ok(SpectralField {
            grid: self.grid,
            coeffs: out,
            parity: Parity::EvenZ,
        })
    }

    /// f minus its vertical average; the average of the result is zero.
    pub fn vertical_fluctuation(&self) -> Result<SpectralField, CoreError> {
        if self.parity != Parity::EvenZ {
            return Err(CoreError::ParityContract(self.parity));
        }
        let mut out = self.clone();
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for ix in 0..nx {
            for iy in 0..ny {
                out.coeffs[[ix, iy, 0]] = Complex64::ZERO;
            }
        }
        Ok(out)
    }

    /// Primitive g(.,z) = int_0^z f dz' computed per horizontal mode. The
    /// kz != 0 content integrates spectrally; the kz = 0 content produces a
    /// linear-in-z term returned separately so the periodic part stays exact.
    pub fn vertical_integral(&self) -> VerticalPrimitive {
        let (nx, ny, nz) = self.grid.shape();
        let mut periodic = Array3::zeros((nx, ny, nz));
        let mut slope = Array2::zeros((nx, ny));
        for ix in 0..nx {
            for iy in 0..ny {
                let mut constant = Complex64::ZERO;
                for iz in 0..nz {
                    let kz = Grid::mode_of(iz, nz);
                    if kz == 0 {
                        slope[[ix, iy]] = self.coeffs[[ix, iy, 0]];
                    } else {
                        let g = self.coeffs[[ix, iy, iz]] / Complex64::new(0.0, PI * kz as f64);
                        periodic[[ix, iy, iz]] = g;
                        constant -= g;
                    }
                }
                // g(.,0) = 0 exactly: the kz = 0 slot absorbs -sum of the rest.
                periodic[[ix, iy, 0]] = constant;
            }
        }
        let parity = match self.parity {
            Parity::EvenZ => Parity::OddZ,
            Parity::OddZ => Parity::EvenZ,
            Parity::None => Parity::None,
        };
        VerticalPrimitive {
            periodic: SpectralField {
                grid: self.grid,
                coeffs: periodic,
                parity,
            },
            slope,
        }
    }

    /// Pointwise product formed in physical space. Optionally 2/3-dealiased.
    pub fn multiply(&self, other: &SpectralField, dealias: bool) -> SpectralField {
        assert_eq!(self.grid, other.grid, "product of fields on different grids");
        let a = self.to_physical();
        let b = other.to_physical();
        let prod = &a * &b;
        let parity = self.parity.combine(other.parity);
        let field = Self::from_physical_unchecked(self.grid, &prod, parity);
        if dealias {
            field.dealias()
        } else {
            field
        }
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.mapv_inplace(|c| c * factor);
        out
    }

    /// self += factor * other; parity tag degrades to None on mismatch.
    pub fn add_scaled(&mut self, other: &SpectralField, factor: f64) {
        assert_eq!(self.grid, other.grid);
        ndarray::Zip::from(&mut self.coeffs)
            .and(&other.coeffs)
            .for_each(|a, &b| *a += b * factor);
        if self.parity != other.parity {
            self.parity = Parity::None;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }
}

impl std::ops::Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl std::ops::Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

/// Result of [`SpectralField::vertical_integral`]: a periodic spectral part
/// plus a linear-in-z term with one coefficient per horizontal mode.
#[derive(Debug, Clone)]
pub struct VerticalPrimitive {
    pub periodic: SpectralField,
    pub slope: Array2<Complex64>,
}

impl VerticalPrimitive {
    /// L^2 norm (volume convention of [`SpectralField::hs_norm`]) of the
    /// linear-term coefficient, i.e. of the vertical mean of the integrand.
    pub fn slope_l2(&self) -> f64 {
        let sum: f64 = self.slope.iter().map(|c| c.norm_sqr()).sum();
        (Grid::VOLUME * sum).sqrt()
    }

    /// z-derivative of the primitive; reproduces the integrand.
    pub fn derivative_z(&self) -> SpectralField {
        let mut out = self.periodic.derivative(Axis3::Z, 1);
        let (nx, ny) = (out.grid.nx, out.grid.ny);
        for ix in 0..nx {
            for iy in 0..ny {
                out.coeffs[[ix, iy, 0]] += self.slope[[ix, iy]];
            }
        }
        out
    }

    /// Physical samples of periodic part + slope * z at the grid points.
    pub fn to_physical(&self) -> Array3<f64> {
        let mut phys = self.periodic.to_physical();
        let grid = self.periodic.grid;
        let mut slope2 = self.slope.clone();
        fft::fft2(&mut slope2, false);
        for ix in 0..grid.nx {
            for iy in 0..grid.ny {
                let s = slope2[[ix, iy]].re;
                for iz in 0..grid.nz {
                    phys[[ix, iy, iz]] += s * Grid::coordinate(iz, grid.nz);
                }
            }
        }
        phys
    }

    /// Discard the linear term, returning the periodic part and the L^2 size
    /// of what was dropped.
    pub fn into_periodic(self) -> (SpectralField, f64) {
        let defect = self.slope_l2();
        (self.periodic, defect)
    }
}
