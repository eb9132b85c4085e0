use super::config::Shape;
use crate::error::{Error, Result};
use crate::field::FieldGrid;

/// Occupied cells and the number density they carry.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleGeometry {
    pub shape: Shape,
    /// Grid indices in ascending order.
    pub occupied_cells: Vec<usize>,
    /// 1/m^3.
    pub density: f64,
}

/// Cells of `grid` whose centres `(i + 1/2) l` lie inside `shape`, in
/// ascending index order. Every such cell must be in the interior.
pub fn rasterize(shape: &Shape, grid: &FieldGrid) -> Result<Vec<usize>> {
    let l = grid.spacing();
    let dims = grid.dims();
    let inside: Box<dyn Fn([f64; 3]) -> bool> = match *shape {
        Shape::Sphere { center, radius } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::config("geometry.radius", "must be positive"));
            }
            let c = center.unwrap_or_else(|| default_center(grid));
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("geometry.center", "must be finite"));
            }
            let r2 = radius * radius;
            Box::new(move |p: [f64; 3]| {
                let d: f64 = (0..3).map(|a| (p[a] - c[a]).powi(2)).sum();
                d <= r2 * (1.0 + 1e-12)
            })
        }
        Shape::Box { min, max } => {
            if (0..3).any(|a| !(min[a] < max[a])) {
                return Err(Error::config("geometry.max", "must exceed geometry.min on every axis"));
            }
            Box::new(move |p: [f64; 3]| (0..3).all(|a| p[a] >= min[a] && p[a] <= max[a]))
        }
    };
    let mut cells = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let centre = [x, y, z].map(|i| (i as f64 + 0.5) * l);
                if inside(centre) {
                    if !grid.in_interior([x, y, z]) {
                        return Err(Error::config(
                            "geometry",
                            format!("shape reaches cell {:?} outside the interior (absorbing layer or grid edge)", [x, y, z]),
                        ));
                    }
                    cells.push(grid.index([x, y, z]));
                }
            }
        }
    }
    Ok(cells)
}

/// Centre of the middle cell, m.
pub fn default_center(grid: &FieldGrid) -> [f64; 3] {
    let l = grid.spacing();
    grid.dims().map(|n| ((n / 2) as f64 + 0.5) * l)
}

pub fn rasterize_sphere(center: [f64; 3], radius: f64, density: f64, grid: &FieldGrid) -> Result<EnsembleGeometry> {
    let shape = Shape::Sphere {
        center: Some(center),
        radius,
    };
    Ok(EnsembleGeometry {
        occupied_cells: rasterize(&shape, grid)?,
        shape,
        density,
    })
}
