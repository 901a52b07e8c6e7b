use std::fmt;
use std::str::FromStr;

use crate::energy::GraphTopology;
use crate::error::{MrfError, Result};

/// Graph structures of the synthetic test bed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Grid with 4 neighbors per node.
    Grid4,
    /// Grid with 8 neighbors (3x3 window).
    Grid8,
    /// Grid with 24 neighbors (5x5 window).
    Grid24,
    /// Complete graph.
    Full,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Grid4 => "GRID4",
            Structure::Grid8 => "GRID8",
            Structure::Grid24 => "GRID24",
            Structure::Full => "FULL",
        }
    }

    /// Offsets `(dy, dx)` linking a pixel to its later neighbors; `None` for `Full`.
    pub fn offsets(self) -> Option<Vec<(isize, isize)>> {
        match self {
            Structure::Grid4 => Some(vec![(0, 1), (1, 0)]),
            Structure::Grid8 => Some(window_offsets(1)),
            Structure::Grid24 => Some(window_offsets(2)),
            Structure::Full => None,
        }
    }

    /// Topology on a `size x size` grid, or on `size` nodes for `Full`.
    pub fn topology(self, size: usize) -> Result<GraphTopology> {
        match self.offsets() {
            Some(offsets) => grid_topology(size, size, &offsets),
            None => full_topology(size),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = MrfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GRID4" => Ok(Structure::Grid4),
            "GRID8" => Ok(Structure::Grid8),
            "GRID24" => Ok(Structure::Grid24),
            "FULL" => Ok(Structure::Full),
            _ => Err(MrfError::InvalidInput(format!("unknown structure `{s}`"))),
        }
    }
}

/// Half of the `(2r+1) x (2r+1)` window: offsets with `dy > 0`, or `dy = 0` and `dx > 0`,
/// ordered by `dy` then `dx`.
pub fn window_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in 0..=r {
        for dx in -r..=r {
            if dy > 0 || dx > 0 {
                out.push((dy, dx));
            }
        }
    }
    out
}

/// Row-major grid where pixel `p` links to `p + offset` for every in-bounds offset.
pub fn grid_topology(
    width: usize,
    height: usize,
    offsets: &[(isize, isize)],
) -> Result<GraphTopology> {
    let mut edges = Vec::new();
    for r in 0..height {
        for c in 0..width {
            let p = r * width + c;
            for &(dy, dx) in offsets {
                let (rr, cc) = (r as isize + dy, c as isize + dx);
                if rr >= 0 && cc >= 0 && (rr as usize) < height && (cc as usize) < width {
                    edges.push((p, rr as usize * width + cc as usize));
                }
            }
        }
    }
    GraphTopology::new(width * height, edges)
}

pub fn full_topology(n: usize) -> Result<GraphTopology> {
    let edges = (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .collect();
    GraphTopology::new(n, edges)
}
