use crate::model::{torus_distance, Position, WorldDims};

/// Upper bound on cells per axis, so tiny cell sizes cannot blow up memory.
const MAX_CELLS_PER_AXIS: usize = 1024;

/// Uniform bucket grid over the wrapped world.
///
/// Buckets are stored compactly: `ids[starts[c]..starts[c + 1]]` are the agent
/// indices in cell `c`, in ascending order. Cells are at least `cell_size`
/// wide, so a query of radius `r <= cell_size` inspects only the wrapped 3x3
/// neighbourhood.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    world: WorldDims,
    cell_size: f64,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    starts: Vec<u32>,
    ids: Vec<u32>,
}

fn cells_along(extent: f64, cell_size: f64) -> usize {
    // Shave a hair off so the realised cell is strictly wider than requested.
    let n = (extent / (cell_size * (1.0 + 1e-9))).floor();
    if n.is_finite() && n >= 1.0 {
        (n as usize).min(MAX_CELLS_PER_AXIS)
    } else if n.is_finite() {
        1
    } else {
        MAX_CELLS_PER_AXIS
    }
}

impl SpatialGrid {
    /// Buckets `positions` (indexed by agent id). Positions must be canonical.
    pub fn build(positions: &[Position], world: WorldDims, cell_size: f64) -> Self {
        let nx = cells_along(world.width, cell_size);
        let ny = cells_along(world.height, cell_size);
        let mut grid = SpatialGrid {
            world,
            cell_size,
            nx,
            ny,
            cell_w: world.width / nx as f64,
            cell_h: world.height / ny as f64,
            starts: vec![0; nx * ny + 1],
            ids: vec![0; positions.len()],
        };
        let cells: Vec<usize> = positions.iter().map(|&p| grid.cell_index(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (id, &c) in cells.iter().enumerate() {
            grid.ids[fill[c] as usize] = id as u32;
            fill[c] += 1;
        }
        grid
    }

    pub fn world(&self) -> WorldDims {
        self.world
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Cell column and row containing a canonical position.
    pub fn cell_of(&self, p: Position) -> (usize, usize) {
        let cx = ((p.x / self.cell_w) as usize).min(self.nx - 1);
        let cy = ((p.y / self.cell_h) as usize).min(self.ny - 1);
        (cx, cy)
    }

    fn cell_index(&self, p: Position) -> usize {
        let (cx, cy) = self.cell_of(p);
        cy * self.nx + cx
    }

    pub fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.nx + cx;
        &self.ids[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Wrapped cell offsets `-rings..=rings` along one axis, without repeats.
    fn axis_cells(centre: usize, rings: usize, n: usize) -> Vec<usize> {
        if 2 * rings + 1 >= n {
            return (0..n).collect();
        }
        (0..=2 * rings)
            .map(|k| (centre + n + k - rings) % n)
            .collect()
    }

    /// Calls `visit` with every agent index in the cells that can hold a point
    /// within `radius` of `p`.
    pub fn for_each_candidate(&self, p: Position, radius: f64, mut visit: impl FnMut(u32)) {
        let (cx, cy) = self.cell_of(p);
        let rings = |cell: f64| (((radius / cell) * (1.0 + 1e-9)).ceil() as usize).max(1);
        let (rx, ry) = (rings(self.cell_w), rings(self.cell_h));
        let cols = Self::axis_cells(cx, rx, self.nx);
        for row in Self::axis_cells(cy, ry, self.ny) {
            for &col in &cols {
                for &id in self.bucket(col, row) {
                    visit(id);
                }
            }
        }
    }

    /// Agents within torus distance `<= radius` of `p`, as `(id, distance)`
    /// sorted by id.
    pub fn within(&self, p: Position, radius: f64, positions: &[Position]) -> Vec<(u32, f64)> {
        let mut found = Vec::new();
        self.for_each_candidate(p, radius, |id| {
            let d = torus_distance(p, positions[id as usize], self.world);
            if d <= radius {
                found.push((id, d));
            }
        });
        found.sort_unstable_by_key(|&(id, _)| id);
        found
    }

    /// Unordered pairs `(lo, hi)` at torus distance strictly below `radius`,
    /// sorted.
    pub fn pairs_closer_than(&self, radius: f64, positions: &[Position]) -> Vec<(u32, u32)> {
        let mut pairs = Vec::new();
        for (i, &p) in positions.iter().enumerate() {
            let i = i as u32;
            self.for_each_candidate(p, radius, |j| {
                if j > i && torus_distance(p, positions[j as usize], self.world) < radius {
                    pairs.push((i, j));
                }
            });
        }
        pairs.sort_unstable();
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_agent_in_its_own_bucket() {
        let world = WorldDims::new(10.0, 10.0);
        let pts = [
            Position::new(0.0, 0.0),
            Position::new(9.999, 9.999),
            Position::new(5.0, 2.5),
            Position::new(2.5, 5.0),
        ];
        let grid = SpatialGrid::build(&pts, world, 2.5);
        assert_eq!(grid.dims(), (3, 3));
        let mut seen = vec![0; pts.len()];
        let (nx, ny) = grid.dims();
        for cy in 0..ny {
            for cx in 0..nx {
                for &id in grid.bucket(cx, cy) {
                    assert_eq!(grid.cell_of(pts[id as usize]), (cx, cy));
                    seen[id as usize] += 1;
                }
            }
        }
        assert_eq!(seen, vec![1; pts.len()]);
    }

    #[test]
    fn query_sees_across_the_seam() {
        let world = WorldDims::new(100.0, 100.0);
        let pts = [
            Position::new(0.2, 50.0),
            Position::new(99.5, 50.0),
            Position::new(50.0, 50.0),
        ];
        let grid = SpatialGrid::build(&pts, world, 2.5);
        let hits = grid.within(pts[0], 2.5, &pts);
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[1].0, 1);
        assert!((hits[1].1 - 0.7).abs() < 1e-12);
        assert_eq!(grid.pairs_closer_than(1.0, &pts), vec![(0, 1)]);
    }

    #[test]
    fn large_radius_falls_back_to_wider_rings() {
        let world = WorldDims::new(100.0, 100.0);
        let pts = [Position::new(10.0, 10.0), Position::new(17.0, 10.0)];
        let grid = SpatialGrid::build(&pts, world, 1.0);
        assert_eq!(grid.within(pts[0], 7.5, &pts).len(), 2);
    }

    #[test]
    fn tiny_cells_are_capped() {
        let world = WorldDims::new(100.0, 100.0);
        let grid = SpatialGrid::build(&[Position::new(1.0, 1.0)], world, 0.0);
        assert_eq!(grid.dims(), (MAX_CELLS_PER_AXIS, MAX_CELLS_PER_AXIS));
    }
}
