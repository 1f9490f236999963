//! Uniform Cartesian meshes in 1D and 2D.

use crate::{Result, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    SlipWall,
}

/// Which exterior state a boundary face couples to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Neighbor {
    /// Interior or periodic neighbor element.
    Element(usize),
    /// Perfectly conducting slip wall with outward unit normal.
    Wall([f64; 3]),
}

/// Uniform Cartesian mesh; in 2D the element size is the same in both
/// directions.
#[derive(Clone, Debug)]
pub struct CartesianMesh {
    pub dimension: usize,
    pub nx: usize,
    pub ny: usize,
    pub bounds_x: [f64; 2],
    pub bounds_y: [f64; 2],
    /// Element edge length (identical per direction).
    pub h: f64,
    pub bc_x: BoundaryKind,
    pub bc_y: BoundaryKind,
}

impl CartesianMesh {
    pub fn new_1d(bounds: [f64; 2], ne: usize, bc: BoundaryKind) -> Result<Self> {
        if ne == 0 || !(bounds[1] > bounds[0]) {
            return Err(SolverError::InvalidDomain(format!(
                "1D domain [{}, {}] with {ne} elements",
                bounds[0], bounds[1]
            )));
        }
        Ok(Self {
            dimension: 1,
            nx: ne,
            ny: 1,
            bounds_x: bounds,
            bounds_y: [0.0, 0.0],
            h: (bounds[1] - bounds[0]) / ne as f64,
            bc_x: bc,
            bc_y: BoundaryKind::Periodic,
        })
    }

    pub fn new_2d(
        bounds_x: [f64; 2],
        bounds_y: [f64; 2],
        nx: usize,
        ny: usize,
        bc_x: BoundaryKind,
        bc_y: BoundaryKind,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 || !(bounds_x[1] > bounds_x[0]) || !(bounds_y[1] > bounds_y[0]) {
            return Err(SolverError::InvalidDomain(
                "degenerate 2D domain or element counts".into(),
            ));
        }
        let hx = (bounds_x[1] - bounds_x[0]) / nx as f64;
        let hy = (bounds_y[1] - bounds_y[0]) / ny as f64;
        if (hx - hy).abs() > 1e-12 * hx.max(hy) {
            return Err(SolverError::InvalidDomain(format!(
                "2D meshes need a uniform grid size, got dx = {hx}, dy = {hy}"
            )));
        }
        Ok(Self {
            dimension: 2,
            nx,
            ny,
            bounds_x,
            bounds_y,
            h: hx,
            bc_x,
            bc_y,
        })
    }

    #[inline]
    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    /// 1D mapping Jacobian per direction, `J = h/2`.
    #[inline]
    pub fn jacobian(&self) -> f64 {
        0.5 * self.h
    }

    #[inline]
    pub fn element_index(&self, ex: usize, ey: usize) -> usize {
        ex + self.nx * ey
    }

    #[inline]
    pub fn element_coords(&self, e: usize) -> (usize, usize) {
        (e % self.nx, e / self.nx)
    }

    /// Lower-left corner of an element.
    pub fn element_origin(&self, e: usize) -> (f64, f64) {
        let (ex, ey) = self.element_coords(e);
        (
            self.bounds_x[0] + self.h * ex as f64,
            self.bounds_y[0] + self.h * ey as f64,
        )
    }

    /// Neighbor across the low-x face of element `e`.
    pub fn neighbor_west(&self, e: usize) -> Neighbor {
        let (ex, ey) = self.element_coords(e);
        if ex > 0 {
            Neighbor::Element(self.element_index(ex - 1, ey))
        } else {
            match self.bc_x {
                BoundaryKind::Periodic => Neighbor::Element(self.element_index(self.nx - 1, ey)),
                BoundaryKind::SlipWall => Neighbor::Wall([-1.0, 0.0, 0.0]),
            }
        }
    }

    pub fn neighbor_east(&self, e: usize) -> Neighbor {
        let (ex, ey) = self.element_coords(e);
        if ex + 1 < self.nx {
            Neighbor::Element(self.element_index(ex + 1, ey))
        } else {
            match self.bc_x {
                BoundaryKind::Periodic => Neighbor::Element(self.element_index(0, ey)),
                BoundaryKind::SlipWall => Neighbor::Wall([1.0, 0.0, 0.0]),
            }
        }
    }

    pub fn neighbor_south(&self, e: usize) -> Neighbor {
        let (ex, ey) = self.element_coords(e);
        if ey > 0 {
            Neighbor::Element(self.element_index(ex, ey - 1))
        } else {
            match self.bc_y {
                BoundaryKind::Periodic => Neighbor::Element(self.element_index(ex, self.ny - 1)),
                BoundaryKind::SlipWall => Neighbor::Wall([0.0, -1.0, 0.0]),
            }
        }
    }

    pub fn neighbor_north(&self, e: usize) -> Neighbor {
        let (ex, ey) = self.element_coords(e);
        if ey + 1 < self.ny {
            Neighbor::Element(self.element_index(ex, ey + 1))
        } else {
            match self.bc_y {
                BoundaryKind::Periodic => Neighbor::Element(self.element_index(ex, 0)),
                BoundaryKind::SlipWall => Neighbor::Wall([0.0, 1.0, 0.0]),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_periodic_mesh() {
        let m =
            CartesianMesh::new_2d([-1.0, 1.0], [-1.0, 1.0], 16, 16, BoundaryKind::Periodic,
                BoundaryKind::Periodic)
            .unwrap();
        assert_eq!(m.n_elements(), 256);
        assert!((m.h - 0.125).abs() < 1e-15);
        // periodic wrap on the west edge
        assert_eq!(m.neighbor_west(0), Neighbor::Element(15));
    }

    #[test]
    fn khi_walls_in_y() {
        let m = CartesianMesh::new_2d(
            [-1.0, 1.0],
            [-1.0, 1.0],
            8,
            8,
            BoundaryKind::Periodic,
            BoundaryKind::SlipWall,
        )
        .unwrap();
        assert_eq!(m.neighbor_south(3), Neighbor::Wall([0.0, -1.0, 0.0]));
        assert_eq!(
            m.neighbor_north(m.element_index(3, 7)),
            Neighbor::Wall([0.0, 1.0, 0.0])
        );
        assert_eq!(m.neighbor_east(m.element_index(7, 2)), Neighbor::Element(m.element_index(0, 2)));
    }

    #[test]
    fn non_square_elements_rejected() {
        assert!(CartesianMesh::new_2d(
            [0.0, 2.0],
            [0.0, 1.0],
            4,
            4,
            BoundaryKind::Periodic,
            BoundaryKind::Periodic
        )
        .is_err());
    }

    #[test]
    fn one_dimensional_counts() {
        let m = CartesianMesh::new_1d([-1.0, 1.0], 4, BoundaryKind::Periodic).unwrap();
        assert_eq!(m.n_elements(), 4);
        assert!((m.h - 0.5).abs() < 1e-15);
        assert_eq!(m.neighbor_west(0), Neighbor::Element(3));
        assert_eq!(m.neighbor_east(3), Neighbor::Element(0));
    }
}
