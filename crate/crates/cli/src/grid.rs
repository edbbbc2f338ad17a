use std::f64::consts::TAU;

use clap::ValueEnum;
use hilmod::C64;

use crate::CliError;

pub const MAX_POINTS: usize = 10_000;
pub const DEFAULT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// Concentric rings times equally spaced spokes, plus the origin.
    Radial,
    /// A square lattice clipped to the disk.
    Box,
}

#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub kind: GridKind,
    pub resolution: usize,
    pub margin: f64,
}

impl Grid {
    pub fn new(kind: GridKind, resolution: usize, margin: f64) -> Result<Self, CliError> {
        if !(margin > 0.0 && margin < 0.5) {
            return Err(CliError::Usage(format!("margin {margin} outside (0, 0.5)")));
        }
        if resolution < 2 {
            return Err(CliError::Usage("grid resolution must be at least 2".into()));
        }
        let g = Self {
            kind,
            resolution,
            margin,
        };
        let total = g.count();
        if total > MAX_POINTS {
            return Err(CliError::Usage(format!(
                "grid of resolution {resolution} has {total} points, limit is {MAX_POINTS}"
            )));
        }
        Ok(g)
    }

    fn count(&self) -> usize {
        let n = self.resolution;
        match self.kind {
            GridKind::Radial => 1 + (n - 1) * n,
            GridKind::Box => n * n,
        }
    }

    /// Points of the closed disk of radius `1 − margin`, in a fixed order.
    pub fn points(&self) -> Vec<C64> {
        let n = self.resolution;
        let radius = 1.0 - self.margin;
        match self.kind {
            GridKind::Radial => {
                let mut pts = vec![C64::new(0.0, 0.0)];
                for ring in 1..n {
                    let r = radius * ring as f64 / (n - 1) as f64;
                    for spoke in 0..n {
                        pts.push(C64::from_polar(r, TAU * spoke as f64 / n as f64));
                    }
                }
                pts
            }
            GridKind::Box => {
                let coord = |i: usize| radius * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
                let mut pts = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let z = C64::new(coord(j), coord(i));
                        if z.norm() <= radius {
                            pts.push(z);
                        }
                    }
                }
                pts
            }
        }
    }
}
