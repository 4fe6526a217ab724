//! Genuinely two-dimensional fields on the horizontal torus. The hydrostatic
//! density is stored this way so its z-independence is structural rather than
//! enforced by projection.

use super::{fft, Axis3, Grid, Parity, SpectralField};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Fourier coefficients of a real scalar field on the horizontal torus.
#[derive(Debug, Clone)]
pub struct HorizontalField {
    nx: usize,
    ny: usize,
    coeffs: Array2<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisH {
    X,
    Y,
}

impl HorizontalField {
    pub fn zeros(nx: usize, ny: usize) -> HorizontalField {
        HorizontalField {
            nx,
            ny,
            coeffs: Array2::zeros((nx, ny)),
        }
    }

    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> HorizontalField {
        let mut values = Array2::zeros((nx, ny));
        for ix in 0..nx {
            let x = Grid::coordinate(ix, nx);
            for iy in 0..ny {
                let y = Grid::coordinate(iy, ny);
                values[[ix, iy]] = f(x, y);
            }
        }
        HorizontalField::from_physical(&values)
    }

    pub fn from_physical(values: &Array2<f64>) -> HorizontalField {
        let (nx, ny) = values.dim();
        let mut coeffs = values.mapv(|v| Complex64::new(v, 0.0));
        fft::fft2(&mut coeffs, true);
        let scale = 1.0 / (nx * ny) as f64;
        coeffs.mapv_inplace(|c| c * scale);
        HorizontalField { nx, ny, coeffs }
    }

    pub fn to_physical(&self) -> Array2<f64> {
        let mut buf = self.coeffs.clone();
        fft::fft2(&mut buf, false);
        buf.mapv(|c| c.re)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    /// Coefficient of signed mode (kx, ky).
    pub fn mode(&self, kx: i64, ky: i64) -> Complex64 {
        self.coeffs[[Grid::index_of(kx, self.nx), Grid::index_of(ky, self.ny)]]
    }

    pub fn derivative(&self, axis: AxisH, order: u32) -> HorizontalField {
        let mut out = self.coeffs.clone();
        let pow = |k: i64| Complex64::new(0.0, PI * k as f64).powu(order);
        match axis {
            AxisH::X => {
                for ix in 0..self.nx {
                    let factor = pow(Grid::mode_of(ix, self.nx));
                    out.slice_mut(ndarray::s![ix, ..]).mapv_inplace(|c| c * factor);
                }
            }
            AxisH::Y => {
                for iy in 0..self.ny {
                    let factor = pow(Grid::mode_of(iy, self.ny));
                    out.slice_mut(ndarray::s![.., iy]).mapv_inplace(|c| c * factor);
                }
            }
        }
        HorizontalField {
            nx: self.nx,
            ny: self.ny,
            coeffs: out,
        }
    }

    pub fn multiply(&self, other: &HorizontalField, dealias: bool) -> HorizontalField {
        assert_eq!(self.shape(), other.shape());
        let prod = &self.to_physical() * &other.to_physical();
        let field = HorizontalField::from_physical(&prod);
        if dealias {
            field.dealias()
        } else {
            field
        }
    }

    pub fn dealias(&self) -> HorizontalField {
        let (cx, cy) = (self.nx as i64 / 3, self.ny as i64 / 3);
        let mut out = self.coeffs.clone();
        for ix in 0..self.nx {
            let kx = Grid::mode_of(ix, self.nx).abs();
            for iy in 0..self.ny {
                let ky = Grid::mode_of(iy, self.ny).abs();
                if kx > cx || ky > cy {
                    out[[ix, iy]] = Complex64::ZERO;
                }
            }
        }
        HorizontalField {
            nx: self.nx,
            ny: self.ny,
            coeffs: out,
        }
    }

    pub fn scaled(&self, factor: f64) -> HorizontalField {
        let mut out = self.clone();
        out.coeffs.mapv_inplace(|c| c * factor);
        out
    }

    pub fn add_scaled(&mut self, other: &HorizontalField, factor: f64) {
        assert_eq!(self.shape(), other.shape());
        ndarray::Zip::from(&mut self.coeffs)
            .and(&other.coeffs)
            .for_each(|a, &b| *a += b * factor);
    }

    /// Embed as a z-independent (even) 3-D field on `grid`.
    pub fn embed(&self, grid: Grid) -> SpectralField {
        assert_eq!((self.nx, self.ny), (grid.nx, grid.ny));
        let mut out = SpectralField::zeros(grid, Parity::EvenZ);
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                out.coeffs_mut()[[ix, iy, 0]] = self.coeffs[[ix, iy]];
            }
        }
        out
    }

    /// Extract the kz = 0 slice of a 3-D field (its vertical average when the
    /// field is even).
    pub fn from_level_zero(field: &SpectralField) -> HorizontalField {
        let grid = field.grid();
        let mut coeffs = Array2::zeros((grid.nx, grid.ny));
        for ix in 0..grid.nx {
            for iy in 0..grid.ny {
                coeffs[[ix, iy]] = field.coeffs()[[ix, iy, 0]];
            }
        }
        HorizontalField {
            nx: grid.nx,
            ny: grid.ny,
            coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl std::ops::Add for &HorizontalField {
    type Output = HorizontalField;
    fn add(self, rhs: &HorizontalField) -> HorizontalField {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl std::ops::Sub for &HorizontalField {
    type Output = HorizontalField;
    fn sub(self, rhs: &HorizontalField) -> HorizontalField {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

/// Horizontal gradient of a 3-D field as a pair (f_x, f_y).
pub fn gradient_h(f: &SpectralField) -> (SpectralField, SpectralField) {
    (f.derivative(Axis3::X, 1), f.derivative(Axis3::Y, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_and_extract_round_trip() {
        let grid = Grid::cube(8).unwrap();
        let h = HorizontalField::from_fn(8, 8, |x, y| (PI * x).cos() + 0.3 * (PI * y).sin());
        let f = h.embed(grid);
        assert_eq!(f.parity(), Parity::EvenZ);
        let back = HorizontalField::from_level_zero(&f);
        let diff: f64 = (&back.coeffs - &h.coeffs).iter().map(|c| c.norm()).sum();
        assert!(diff < 1e-14);
        // embedded field really is z-independent
        assert!((&f.vertical_average().unwrap() - &f).l2_norm() < 1e-14);
    }

    #[test]
    fn horizontal_derivative() {
        let h = HorizontalField::from_fn(16, 16, |x, _| (PI * x).sin());
        let dx = h.derivative(AxisH::X, 1);
        let expect = HorizontalField::from_fn(16, 16, |x, _| PI * (PI * x).cos());
        let diff: f64 = (&dx.coeffs - &expect.coeffs).iter().map(|c| c.norm()).sum();
        assert!(diff < 1e-12);
    }
}
