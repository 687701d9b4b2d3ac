//! Projective warps from four-point correspondences.

use polyaug_core::{Error, Result, Rng};

use crate::geometry::warp;
use crate::raster::Raster;

pub type Point = (f64, f64);

/// Row-major 3x3 matrix with `h[8] = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub [f64; 9]);

impl Homography {
    pub const IDENTITY: Homography = Homography([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    /// Solves for `H` with `H(from[i]) = to[i]`. Fails when the system is
    /// singular or either quad is not strictly convex.
    pub fn from_points(from: &[Point; 4], to: &[Point; 4]) -> Result<Self> {
        if !is_convex(from) || !is_convex(to) {
            return Err(Error::failed("perspective_transform", "degenerate quadrilateral"));
        }
        let mut a = [[0f64; 9]; 8];
        for i in 0..4 {
            let (x, y) = from[i];
            let (u, v) = to[i];
            a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
            a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
        }
        for col in 0..8 {
            let pivot = (col..8)
                .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
                .expect("non-empty range");
            if a[pivot][col].abs() < 1e-12 {
                return Err(Error::failed("perspective_transform", "singular homography system"));
            }
            a.swap(col, pivot);
            for r in 0..8 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..9 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        let mut h = [0f64; 9];
        for i in 0..8 {
            h[i] = a[i][8] / a[i][i];
        }
        h[8] = 1.0;
        Ok(Homography(h))
    }

    pub fn apply(&self, (x, y): Point) -> Option<Point> {
        let h = &self.0;
        let w = h[6] * x + h[7] * y + h[8];
        if w.abs() < 1e-12 {
            return None;
        }
        Some(((h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w))
    }
}

fn is_convex(q: &[Point; 4]) -> bool {
    let mut sign = 0.0f64;
    for i in 0..4 {
        let (a, b, c) = (q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
        if cross.abs() < 1e-9 || (sign != 0.0 && cross.signum() != sign) {
            return false;
        }
        sign = cross.signum();
    }
    true
}

pub fn corners(width: u32, height: u32) -> [Point; 4] {
    let (w, h) = (width as f64, height as f64);
    [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]
}

pub fn jitter(base: &[Point; 4], sigma: f64, rng: &mut Rng) -> [Point; 4] {
    let mut out = *base;
    for p in &mut out {
        p.0 += rng.gaussian(0.0, sigma);
        p.1 += rng.gaussian(0.0, sigma);
    }
    out
}

/// Warps the image so its corners land on `dst`; the canvas keeps its size.
pub fn warp_to_quad(img: &Raster, dst: &[Point; 4], fill: [u8; 4]) -> Result<Raster> {
    let inverse = Homography::from_points(dst, &corners(img.width(), img.height()))?;
    Ok(warp(img, img.width(), img.height(), fill, move |x, y| inverse.apply((x, y))))
}

pub const MAX_ATTEMPTS: usize = 8;

/// Draws corner jitter until the quad is usable, at most `MAX_ATTEMPTS` times.
pub fn draw_quad(base: &[Point; 4], sigma: f64, rng: &mut Rng) -> Result<([Point; 4], Homography)> {
    for _ in 0..MAX_ATTEMPTS {
        let quad = jitter(base, sigma, rng);
        if let Ok(h) = Homography::from_points(&quad, base) {
            return Ok((quad, h));
        }
    }
    Err(Error::failed(
        "perspective_transform",
        format!("no invertible quadrilateral after {MAX_ATTEMPTS} draws (sigma {sigma})"),
    ))
}

pub fn perspective_transform(img: &Raster, sigma: f64, fill: [u8; 4], rng: &mut Rng) -> Result<Raster> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("perspective_transform", "sigma must be non-negative"));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let base = corners(img.width(), img.height());
    let (_, inverse) = draw_quad(&base, sigma, rng)?;
    Ok(warp(img, img.width(), img.height(), fill, move |x, y| inverse.apply((x, y))))
}
