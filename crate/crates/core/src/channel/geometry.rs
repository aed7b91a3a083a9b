use nalgebra::Vector3;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Local frame of a planar array: `u` and `v` span the aperture, `normal`
/// points out of the front face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub normal: Vec3,
    pub u: Vec3,
    pub v: Vec3,
}

impl Orientation {
    /// Frame with the given normal. `u` is horizontal (`e_z x n`) and `v`
    /// completes a right-handed set, so it points up for a vertical panel.
    pub fn from_normal(normal: Vec3) -> Result<Self> {
        let n = normal
            .try_normalize(1e-12)
            .ok_or_else(|| Error::config("orientation", "normal vector is zero"))?;
        let u = Vec3::z()
            .cross(&n)
            .try_normalize(1e-9)
            .unwrap_or_else(Vec3::x);
        let v = n.cross(&u);
        Ok(Self { normal: n, u, v })
    }

    pub fn facing(from: Vec3, target: Vec3) -> Result<Self> {
        Self::from_normal(target - from)
    }

    /// Components of a global direction in the `(u, v, normal)` frame.
    pub fn to_local(&self, dir: &Vec3) -> Vec3 {
        Vec3::new(self.u.dot(dir), self.v.dot(dir), self.normal.dot(dir))
    }
}

/// Uniform planar array. Element `(p, q)` sits `p` steps along `u` and `q`
/// steps along `v`; its flat index is `p * grid[1] + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub grid: [usize; 2],
    pub spacing: f64,
    /// Physical element extent along `u` and `v`. Zero for point antennas.
    pub element_size: [f64; 2],
    pub center: Vec3,
    pub orientation: Orientation,
}

impl ArrayGeometry {
    pub fn new(
        grid: [usize; 2],
        spacing: f64,
        element_size: [f64; 2],
        center: Vec3,
        orientation: Orientation,
    ) -> Result<Self> {
        if grid[0] == 0 || grid[1] == 0 {
            return Err(Error::config("grid", "side counts must be at least 1"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::config("spacing", format!("must be positive, got {spacing}")));
        }
        if element_size.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::config("element_size", "must be nonnegative"));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::config("position", "must be finite"));
        }
        Ok(Self { grid, spacing, element_size, center, orientation })
    }

    pub fn len(&self) -> usize {
        self.grid[0] * self.grid[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn element_area(&self) -> f64 {
        self.element_size[0] * self.element_size[1]
    }

    /// Offset of element `idx` from the array center, in the local `(u, v)` plane.
    fn local_offset(&self, idx: usize) -> (f64, f64) {
        let (p, q) = (idx / self.grid[1], idx % self.grid[1]);
        let cp = (self.grid[0] as f64 - 1.0) / 2.0;
        let cq = (self.grid[1] as f64 - 1.0) / 2.0;
        ((p as f64 - cp) * self.spacing, (q as f64 - cq) * self.spacing)
    }

    pub fn element_position(&self, idx: usize) -> Vec3 {
        let (x, y) = self.local_offset(idx);
        self.center + self.orientation.u * x + self.orientation.v * y
    }

    pub fn element_positions(&self) -> Vec<Vec3> {
        (0..self.len()).map(|i| self.element_position(i)).collect()
    }

    /// Largest overall dimension: the diagonal of the occupied rectangle.
    pub fn extent(&self) -> f64 {
        let w = (self.grid[0] as f64 - 1.0) * self.spacing + self.element_size[0];
        let h = (self.grid[1] as f64 - 1.0) * self.spacing + self.element_size[1];
        w.hypot(h)
    }

    /// `2 L^2 / lambda` for this array.
    pub fn fraunhofer_distance(&self, wavelength: f64) -> f64 {
        fraunhofer_distance(self.extent(), wavelength)
    }
}

pub fn fraunhofer_distance(array_extent: f64, wavelength: f64) -> f64 {
    2.0 * array_extent * array_extent / wavelength
}

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Azimuth and elevation of a direction given in local `(u, v, n)` components,
/// inverting `(sin az sin el, cos el, cos az sin el)`.
pub fn local_angles(local: &Vec3) -> (f64, f64) {
    let d = local.normalize();
    let el = d.y.clamp(-1.0, 1.0).acos();
    let az = d.x.atan2(d.z);
    (az, el)
}

pub(crate) fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(grid: [usize; 2], spacing: f64, size: [f64; 2]) -> ArrayGeometry {
        let o = Orientation::from_normal(Vec3::x()).unwrap();
        ArrayGeometry::new(grid, spacing, size, Vec3::zeros(), o).unwrap()
    }

    #[test]
    fn frame_is_orthonormal_and_upright() {
        let o = Orientation::facing(Vec3::new(10.0, 10.0, 0.0), Vec3::new(25.0, 0.0, 0.0)).unwrap();
        assert!((o.u.dot(&o.v)).abs() < 1e-15);
        assert!((o.u.dot(&o.normal)).abs() < 1e-15);
        assert!((o.v - Vec3::z()).norm() < 1e-15);
        // a vertical normal falls back to e_x for u
        let up = Orientation::from_normal(Vec3::z()).unwrap();
        assert_eq!(up.u, Vec3::x());
        assert!(Orientation::from_normal(Vec3::zeros()).is_err());
    }

    #[test]
    fn element_layout_is_centered_and_row_major() {
        let g = panel([2, 3], 0.5, [0.0, 0.0]);
        let sum: Vec3 = g.element_positions().iter().sum();
        assert!(sum.norm() < 1e-14);
        // index 1 is one step along v from index 0
        let step = g.element_position(1) - g.element_position(0);
        assert!((step - g.orientation.v * 0.5).norm() < 1e-15);
        let step = g.element_position(3) - g.element_position(0);
        assert!((step - g.orientation.u * 0.5).norm() < 1e-15);
    }

    #[test]
    fn fraunhofer_examples() {
        assert_eq!(fraunhofer_distance(1.0, 0.5), 4.0);
        let lam = 0.0107;
        assert!((fraunhofer_distance(0.1, lam) - 1.869).abs() < 1e-3);
        assert!(fraunhofer_distance(0.1, 1e12) < 1e-13);
    }

    #[test]
    fn extent_includes_element_size() {
        let g = panel([2, 2], 1.0, [1.0, 1.0]);
        assert!((g.extent() - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(panel([1, 1], 1.0, [0.0, 0.0]).extent(), 0.0);
    }

    #[test]
    fn rejects_bad_geometry() {
        let o = Orientation::from_normal(Vec3::x()).unwrap();
        assert!(ArrayGeometry::new([0, 2], 1.0, [0.0; 2], Vec3::zeros(), o).is_err());
        assert!(ArrayGeometry::new([2, 2], 0.0, [0.0; 2], Vec3::zeros(), o).is_err());
    }

    #[test]
    fn local_angles_round_trip() {
        let (az, el) = (0.7f64, 1.1f64);
        let local = Vec3::new(az.sin() * el.sin(), el.cos(), az.cos() * el.sin());
        let (a, e) = local_angles(&local);
        assert!((a - az).abs() < 1e-14 && (e - el).abs() < 1e-14);
    }
}
