//! Deterministic four-action grid worlds parsed from ASCII maps.
//!
//! Map alphabet: `#` wall, `.` free, `S` start, `G` / `1` / `2` scheduled
//! goals (activated in that order). One character per cell, one row per line.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::DiscreteMdpSpec;
use crate::{Error, Result};

/// `(row, col)`, row 0 at the top.
pub type Cell = (usize, usize);

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;
pub const N_ACTIONS: usize = 4;

/// Episodes each scheduled goal stays active by default.
pub const DEFAULT_ACTIVATION: usize = 30;

/// The bundled benchmark maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridMap {
    OfSmall,
    ClusterSimple,
    ClusterHard,
    OfLarge,
    ClusterSimpleLarge,
}

impl GridMap {
    pub const ALL: [GridMap; 5] = [
        GridMap::OfSmall,
        GridMap::ClusterSimple,
        GridMap::ClusterHard,
        GridMap::OfLarge,
        GridMap::ClusterSimpleLarge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridMap::OfSmall => "OF-small",
            GridMap::ClusterSimple => "Cluster-simple",
            GridMap::ClusterHard => "Cluster-hard",
            GridMap::OfLarge => "OF-large",
            GridMap::ClusterSimpleLarge => "Cluster-simple-large",
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            GridMap::OfSmall => include_str!("../../data/maps/of_small.txt"),
            GridMap::ClusterSimple => include_str!("../../data/maps/cluster_simple.txt"),
            GridMap::ClusterHard => include_str!("../../data/maps/cluster_hard.txt"),
            GridMap::OfLarge => include_str!("../../data/maps/of_large.txt"),
            GridMap::ClusterSimpleLarge => include_str!("../../data/maps/cluster_simple_large.txt"),
        }
    }

    pub fn spec(self) -> GridSpec {
        let mut spec = GridSpec::parse(self.ascii(), DEFAULT_ACTIVATION)
            .expect("bundled grid maps are valid");
        spec.map_name = Some(self);
        spec
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        GridMap::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Config(format!("unknown grid map `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub walls: BTreeSet<Cell>,
    pub start: Cell,
    /// Goals in activation order, each with its activation length in episodes.
    pub goal_schedule: Vec<(Cell, usize)>,
    pub map_name: Option<GridMap>,
    index: Vec<Option<usize>>,
}

impl GridSpec {
    /// Validate a layout: start and goals must be free in-bounds cells and
    /// the free cells must form one connected component.
    pub fn new(
        width: usize,
        height: usize,
        walls: BTreeSet<Cell>,
        start: Cell,
        goal_schedule: Vec<(Cell, usize)>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::GridMap("grid must have at least one cell".into()));
        }
        let in_bounds = |(r, c): Cell| r < height && c < width;
        for &cell in &walls {
            if !in_bounds(cell) {
                return Err(cell_err(cell, "wall outside the grid"));
            }
        }
        let check_free = |cell: Cell, what: &str| {
            if !in_bounds(cell) {
                Err(cell_err(cell, &format!("{what} outside the grid")))
            } else if walls.contains(&cell) {
                Err(cell_err(cell, &format!("{what} is on a wall")))
            } else {
                Ok(())
            }
        };
        check_free(start, "start")?;
        for &(goal, _) in &goal_schedule {
            check_free(goal, "goal")?;
        }

        let mut index = vec![None; width * height];
        let mut next = 0;
        for r in 0..height {
            for c in 0..width {
                if !walls.contains(&(r, c)) {
                    index[r * width + c] = Some(next);
                    next += 1;
                }
            }
        }
        let spec = GridSpec {
            width,
            height,
            walls,
            start,
            goal_schedule,
            map_name: None,
            index,
        };

        let reach = spec.distances_from(start);
        if let Some(cell) = spec
            .free_cells()
            .into_iter()
            .find(|&cell| reach[spec.state_of(cell).unwrap()].is_none())
        {
            return Err(cell_err(cell, "free cell is disconnected from the start"));
        }
        Ok(spec)
    }

    /// Parse an ASCII map. Goals are scheduled in the order `G`, `1`, `2`.
    pub fn parse(text: &str, activation: usize) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut walls = BTreeSet::new();
        let mut start = None;
        let mut goals: [Option<Cell>; 3] = [None; 3];
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::GridMap(format!("row {r} is not {width} cells wide")));
            }
            for (c, ch) in row.chars().enumerate() {
                let slot = match ch {
                    '#' => {
                        walls.insert((r, c));
                        continue;
                    }
                    '.' => continue,
                    'S' => {
                        if start.replace((r, c)).is_some() {
                            return Err(cell_err((r, c), "second start marker"));
                        }
                        continue;
                    }
                    'G' => 0,
                    '1' => 1,
                    '2' => 2,
                    other => return Err(cell_err((r, c), &format!("unknown map symbol `{other}`"))),
                };
                if goals[slot].replace((r, c)).is_some() {
                    return Err(cell_err((r, c), "duplicate goal marker"));
                }
            }
        }
        let start = start.ok_or_else(|| Error::GridMap("map has no `S` start cell".into()))?;
        let schedule = goals.iter().flatten().map(|&g| (g, activation)).collect();
        GridSpec::new(width, height, walls, start, schedule)
    }

    /// Free cells in row-major order; position in this list is the state id.
    pub fn free_cells(&self) -> Vec<Cell> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .filter(|cell| !self.walls.contains(cell))
            .collect()
    }

    pub fn n_free(&self) -> usize {
        self.index.iter().flatten().count()
    }

    pub fn state_of(&self, (r, c): Cell) -> Option<usize> {
        if r < self.height && c < self.width {
            self.index[r * self.width + c]
        } else {
            None
        }
    }

    pub fn cell_of(&self, state: usize) -> Option<Cell> {
        self.index
            .iter()
            .position(|&s| s == Some(state))
            .map(|i| (i / self.width, i % self.width))
    }

    /// Deterministic successor: blocked moves leave the agent in place.
    pub fn move_from(&self, (r, c): Cell, action: usize) -> Cell {
        let target = match action {
            UP if r > 0 => (r - 1, c),
            DOWN if r + 1 < self.height => (r + 1, c),
            LEFT if c > 0 => (r, c - 1),
            RIGHT if c + 1 < self.width => (r, c + 1),
            _ => return (r, c),
        };
        if self.walls.contains(&target) {
            (r, c)
        } else {
            target
        }
    }

    /// Breadth-first step counts from `from` to every state (`None` if
    /// unreachable).
    pub fn distances_from(&self, from: Cell) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_free()];
        let Some(origin) = self.state_of(from) else {
            return dist;
        };
        dist[origin] = Some(0);
        let mut queue = VecDeque::from([(from, 0usize)]);
        while let Some((cell, d)) = queue.pop_front() {
            for action in 0..N_ACTIONS {
                let next = self.move_from(cell, action);
                let id = self.state_of(next).unwrap();
                if dist[id].is_none() {
                    dist[id] = Some(d + 1);
                    queue.push_back((next, d + 1));
                }
            }
        }
        dist
    }
}

fn cell_err((row, col): Cell, msg: &str) -> Error {
    Error::GridCell {
        row,
        col,
        msg: msg.to_string(),
    }
}

/// Reward structure to compile a grid with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// No extrinsic reward, no terminal states.
    Exploration,
    /// Every step costs -1; stepping into the goal pays 0 and terminates.
    Goal(Cell),
}

/// Compile a grid into a tabular MDP (four deterministic moves).
pub fn build_grid(spec: &GridSpec, mode: GridMode) -> Result<DiscreteMdpSpec> {
    let n = spec.n_free();
    let cells = spec.free_cells();
    let goal = match mode {
        GridMode::Exploration => None,
        GridMode::Goal(cell) => Some(
            spec.state_of(cell)
                .ok_or_else(|| cell_err(cell, "goal is not a free cell"))?,
        ),
    };
    let mut transition = vec![0.0; n * N_ACTIONS * n];
    let mut reward = vec![0.0; n * N_ACTIONS * n];
    for (s, &cell) in cells.iter().enumerate() {
        for a in 0..N_ACTIONS {
            let next = spec.state_of(spec.move_from(cell, a)).unwrap();
            let idx = (s * N_ACTIONS + a) * n + next;
            transition[idx] = 1.0;
            if let Some(g) = goal {
                reward[idx] = if next == g { 0.0 } else { -1.0 };
            }
        }
    }
    let mut start = vec![0.0; n];
    start[spec.state_of(spec.start).unwrap()] = 1.0;
    let terminals = goal.into_iter().collect();
    DiscreteMdpSpec::new(n, N_ACTIONS, transition, reward, start, terminals)
}

/// Shortest path length between two free cells.
pub fn bfs_distance(spec: &GridSpec, from: Cell, to: Cell) -> Result<usize> {
    let target = spec
        .state_of(to)
        .ok_or_else(|| cell_err(to, "not a free cell"))?;
    spec.distances_from(from)[target].ok_or(Error::UnreachableGoal)
}
