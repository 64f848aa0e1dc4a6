//! Deterministic executor: Layout programs render to a 64×64 color canvas,
//! CSG2D programs to a 64×64 occupancy grid and CSG3D programs to a 32³ voxel
//! grid.
//!
//! Cells are sampled at their centers over `[-1, 1]^d`; a cell is occupied iff
//! its center lies inside the set. Transforms are applied to sample points
//! through their inverse affine maps, accumulated top-down while compiling the
//! tree into leaves.

mod format;

use std::f64::consts::PI;

use thiserror::Error;

use crate::dsl::{Axis, Body, ColorName, Domain, Expr, Func, Node, Param, Program, Quant, Shape};

pub use format::{decode_visual, encode_visual, file_extension, FormatError};

pub const SIZE_2D: usize = 64;
pub const SIZE_3D: usize = 32;

/// Smallest accumulated scale factor accepted on any axis.
pub const MIN_SCALE: f64 = 1.0 / 64.0;

/// Largest number of primitive instances a program may expand to once
/// symmetry copies are counted.
pub const MAX_LEAVES: u64 = 4096;

/// Primitive instances after expanding symmetry copies.
pub fn leaf_count(e: &Expr) -> u64 {
    match &e.node {
        Node::Comb { children, .. } => leaf_count(&children[0]).saturating_add(leaf_count(&children[1])),
        Node::Transform { func, params, child } => {
            let copies = match (func, params.first()) {
                (Func::SymReflect, _) => 2,
                (Func::SymRotate | Func::SymTranslate, Some(Param::Count(n))) => u64::from(*n),
                _ => 1,
            };
            leaf_count(child).saturating_mul(copies)
        }
        Node::Prim { .. } => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("degenerate scale: accumulated factor {0:.5} below 1/64")]
    DegenerateScale(f64),
    #[error("output touches the canvas border")]
    OutOfCanvas,
    #[error("program expands to {0} primitives, limit is {MAX_LEAVES}")]
    TooComplex(u64),
}

/// Layout pixel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Color {
    Background = 0,
    Red = 1,
    Green = 2,
    Blue = 3,
    Gray = 4,
}

impl From<ColorName> for Color {
    fn from(c: ColorName) -> Self {
        match c {
            ColorName::Red => Color::Red,
            ColorName::Green => Color::Green,
            ColorName::Blue => Color::Blue,
        }
    }
}

/// Layout raster, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Canvas {
    cells: Vec<Color>,
}

impl Canvas {
    pub fn blank() -> Canvas {
        Canvas { cells: vec![Color::Background; SIZE_2D * SIZE_2D] }
    }

    pub fn get(&self, col: usize, row: usize) -> Color {
        self.cells[row * SIZE_2D + col]
    }

    pub fn set(&mut self, col: usize, row: usize, c: Color) {
        self.cells[row * SIZE_2D + col] = c;
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    pub(crate) fn from_cells(cells: Vec<Color>) -> Canvas {
        debug_assert_eq!(cells.len(), SIZE_2D * SIZE_2D);
        Canvas { cells }
    }
}

/// Binary occupancy grid with `side^dims` cells, x fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    side: usize,
    dims: usize,
    cells: Vec<bool>,
}

impl Grid {
    pub fn empty(side: usize, dims: usize) -> Grid {
        Grid { side, dims, cells: vec![false; side.pow(dims as u32)] }
    }

    pub fn empty_2d() -> Grid {
        Grid::empty(SIZE_2D, 2)
    }

    pub fn empty_3d() -> Grid {
        Grid::empty(SIZE_3D, 3)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().rev().fold(0, |acc, &c| acc * self.side + c)
    }

    pub fn get(&self, coords: &[usize]) -> bool {
        self.cells[self.index(coords)]
    }

    pub fn set(&mut self, coords: &[usize], v: bool) {
        let i = self.index(coords);
        self.cells[i] = v;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub(crate) fn from_cells(side: usize, dims: usize, cells: Vec<bool>) -> Grid {
        debug_assert_eq!(cells.len(), side.pow(dims as u32));
        Grid { side, dims, cells }
    }

    /// True when any occupied cell lies on the outer ring of the grid.
    pub fn touches_border(&self) -> bool {
        let last = self.side - 1;
        self.cells.iter().enumerate().any(|(i, &on)| {
            on && (0..self.dims).any(|d| {
                let c = (i / self.side.pow(d as u32)) % self.side;
                c == 0 || c == last
            })
        })
    }
}

/// Executed output of a program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Visual {
    Layout(Canvas),
    Csg2d(Grid),
    Csg3d(Grid),
}

impl Visual {
    pub fn domain(&self) -> Domain {
        match self {
            Visual::Layout(_) => Domain::Layout,
            Visual::Csg2d(_) => Domain::Csg2d,
            Visual::Csg3d(_) => Domain::Csg3d,
        }
    }

    pub fn blank(domain: Domain) -> Visual {
        match domain {
            Domain::Layout => Visual::Layout(Canvas::blank()),
            Domain::Csg2d => Visual::Csg2d(Grid::empty_2d()),
            Domain::Csg3d => Visual::Csg3d(Grid::empty_3d()),
        }
    }
}

/// Occupancy mask: non-background pixels for Layout, identity otherwise.
pub fn occupancy(v: &Visual) -> Grid {
    match v {
        Visual::Layout(c) => Grid::from_cells(
            SIZE_2D,
            2,
            c.cells.iter().map(|p| *p != Color::Background).collect(),
        ),
        Visual::Csg2d(g) | Visual::Csg3d(g) => g.clone(),
    }
}

/// World-to-local affine map `p ↦ m·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    m: [[f64; 3]; 3],
    t: [f64; 3],
}

impl Affine {
    const IDENTITY: Affine = Affine {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        t: [0.0; 3],
    };

    fn linear(m: [[f64; 3]; 3]) -> Affine {
        Affine { m, t: [0.0; 3] }
    }

    fn translate(t: [f64; 3]) -> Affine {
        Affine { m: Affine::IDENTITY.m, t }
    }

    /// `inner ∘ self`: apply `self` first, then `inner`.
    fn then(&self, inner: &Affine) -> Affine {
        let mut m = [[0.0; 3]; 3];
        let mut t = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = inner.m[i][0] * self.m[0][j] + inner.m[i][1] * self.m[1][j] + inner.m[i][2] * self.m[2][j];
            }
            t[i] = inner.m[i][0] * self.t[0] + inner.m[i][1] * self.t[1] + inner.m[i][2] * self.t[2] + inner.t[i];
        }
        Affine { m, t }
    }

    fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = self.t;
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.m[i][0] * p[0] + self.m[i][1] * p[1] + self.m[i][2] * p[2];
        }
        out
    }

    fn inverse(&self) -> Affine {
        let m = &self.m;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
        let inv = adj.map(|row| row.map(|v| v / det));
        let lin = Affine::linear(inv);
        let t = lin.apply(self.t);
        Affine { m: inv, t: [-t[0], -t[1], -t[2]] }
    }
}

/// Axis-aligned world-space box, `[lo, hi]` per axis.
type Bounds = [[f64; 2]; 3];

const EMPTY_BOUNDS: Bounds = [[f64::INFINITY, f64::NEG_INFINITY]; 3];

fn bounds_union(a: &Bounds, b: &Bounds) -> Bounds {
    std::array::from_fn(|k| [a[k][0].min(b[k][0]), a[k][1].max(b[k][1])])
}

fn bounds_meet(a: &Bounds, b: &Bounds) -> Bounds {
    std::array::from_fn(|k| [a[k][0].max(b[k][0]), a[k][1].min(b[k][1])])
}

/// Cell indices whose centers may fall inside `[lo, hi]` on an axis of `n`
/// cells. `flip` is for rows, which count downwards from `y = 1`.
fn cell_range(lo: f64, hi: f64, n: usize, flip: bool) -> std::ops::Range<usize> {
    const SLACK: f64 = 1e-7;
    if !(lo <= hi) {
        return 0..0;
    }
    let h = 2.0 / n as f64;
    let (a, b) = if flip {
        ((1.0 - hi - SLACK) / h - 0.5, (1.0 - lo + SLACK) / h - 0.5)
    } else {
        ((lo - SLACK + 1.0) / h - 0.5, (hi + SLACK + 1.0) / h - 0.5)
    };
    let start = a.ceil().max(0.0);
    let end = (b.floor() + 1.0).min(n as f64);
    if end <= start {
        0..0
    } else {
        start as usize..end as usize
    }
}

fn rot_z(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn rot_x(a: f64) -> [[f64; 3]; 3] {
    let (s, c) = a.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

/// Quantized value mapped to a multiplicative scale in `[1/4, 4]`.
pub fn scale_factor(v: f64) -> f64 {
    (2.0 * v).exp2()
}

/// Quantized value mapped to an angle in `[-π, π]`.
pub fn angle(v: f64) -> f64 {
    PI * v
}

fn reflect_axis(axis: Axis) -> Affine {
    let mut m = Affine::IDENTITY.m;
    let k = match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    m[k][k] = -1.0;
    Affine::linear(m)
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    to_local: Affine,
    /// Lower bound on the smallest singular value of the local-to-world map.
    min_scale: f64,
    color: Option<ColorName>,
}

impl Frame {
    const ROOT: Frame = Frame { to_local: Affine::IDENTITY, min_scale: 1.0, color: None };

    fn push(&self, inv: &Affine) -> Frame {
        Frame { to_local: self.to_local.then(inv), ..*self }
    }
}

#[derive(Debug, Clone)]
struct Leaf {
    to_local: Affine,
    shape: Shape,
    color: Color,
}

impl Leaf {
    /// Every primitive fits in the local box `[-0.5, 0.5]^3`.
    fn bounds(&self) -> Bounds {
        let w = self.to_local.inverse();
        let mut b = EMPTY_BOUNDS;
        for corner in 0..8 {
            let c = [0, 1, 2].map(|k| if corner >> k & 1 == 1 { 0.5 } else { -0.5 });
            let p = w.apply(c);
            for k in 0..3 {
                b[k][0] = b[k][0].min(p[k]);
                b[k][1] = b[k][1].max(p[k]);
            }
        }
        b
    }

    fn contains(&self, p: [f64; 3]) -> bool {
        let [x, y, z] = self.to_local.apply(p);
        match self.shape {
            Shape::Square => x.abs() <= 0.5 && y.abs() <= 0.5,
            Shape::Circle => x * x + y * y <= 0.25,
            Shape::Triangle => y >= -0.5 && y <= 0.5 - 2.0 * x.abs(),
            Shape::Cuboid => x.abs() <= 0.5 && y.abs() <= 0.5 && z.abs() <= 0.5,
            Shape::Sphere => x * x + y * y + z * z <= 0.25,
            Shape::Cylinder => x * x + z * z <= 0.25 && y.abs() <= 0.5,
        }
    }
}

#[derive(Debug, Clone)]
enum CsgNode {
    Leaf(Leaf),
    Op(Func, Box<CsgNode>, Box<CsgNode>),
}

impl CsgNode {
    fn bounds(&self) -> Bounds {
        match self {
            CsgNode::Leaf(l) => l.bounds(),
            CsgNode::Op(Func::Union, a, b) => bounds_union(&a.bounds(), &b.bounds()),
            CsgNode::Op(Func::Intersection, a, b) => bounds_meet(&a.bounds(), &b.bounds()),
            CsgNode::Op(_, a, _) => a.bounds(),
        }
    }

    fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            CsgNode::Leaf(l) => l.contains(p),
            CsgNode::Op(Func::Union, a, b) => a.contains(p) || b.contains(p),
            CsgNode::Op(Func::Intersection, a, b) => a.contains(p) && b.contains(p),
            CsgNode::Op(_, a, b) => a.contains(p) && !b.contains(p),
        }
    }
}

/// A program compiled into directly sampleable leaves.
#[derive(Debug, Clone)]
pub struct Scene {
    domain: Domain,
    kind: SceneKind,
}

#[derive(Debug, Clone)]
enum SceneKind {
    /// Topmost leaf first.
    Layers(Vec<Leaf>),
    Csg { pos: Vec<CsgNode>, neg: Vec<CsgNode> },
}

struct Compiler {
    quant: Quant,
    domain: Domain,
}

impl Compiler {
    fn q(&self, p: &Param) -> f64 {
        match p {
            Param::Quant(i) => self.quant.value(*i),
            _ => unreachable!("grammar guarantees a quantized parameter"),
        }
    }

    fn vec3(&self, params: &[Param]) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(params) {
            *slot = self.q(p);
        }
        v
    }

    /// Inverse map of a plain transform plus the smallest scale it applies.
    fn inverse(&self, func: Func, params: &[Param]) -> (Affine, f64) {
        match func {
            Func::Move => {
                let t = self.vec3(params);
                (Affine::translate([-t[0], -t[1], -t[2]]), 1.0)
            }
            Func::Scale => {
                let mut s = [1.0; 3];
                for (slot, p) in s.iter_mut().zip(params) {
                    *slot = scale_factor(self.q(p));
                }
                let mut m = Affine::IDENTITY.m;
                for k in 0..3 {
                    m[k][k] = 1.0 / s[k];
                }
                let min = s[..self.domain.dims()].iter().fold(f64::INFINITY, |a, b| a.min(*b));
                (Affine::linear(m), min)
            }
            Func::Rotate => {
                let m = if self.domain == Domain::Csg3d {
                    let [a, b, c] = self.vec3(params).map(angle);
                    // forward rotation is Rz·Ry·Rx
                    let inv = Affine::linear(rot_z(-c)).then(&Affine::linear(rot_y(-b)));
                    inv.then(&Affine::linear(rot_x(-a))).m
                } else {
                    rot_z(-angle(self.q(&params[0])))
                };
                (Affine::linear(m), 1.0)
            }
            Func::Reflect => match params[0] {
                Param::Axis(a) => (reflect_axis(a), 1.0),
                _ => unreachable!(),
            },
            _ => unreachable!("not a plain transform: {func:?}"),
        }
    }

    fn transform_frame(&self, frame: &Frame, func: Func, params: &[Param]) -> Result<Frame, ExecError> {
        let (inv, s) = self.inverse(func, params);
        let mut next = frame.push(&inv);
        next.min_scale *= s;
        if next.min_scale < MIN_SCALE {
            return Err(ExecError::DegenerateScale(next.min_scale));
        }
        Ok(next)
    }

    /// Symmetry copies as inverse maps, identity copy first.
    fn symmetry_copies(&self, func: Func, params: &[Param]) -> Vec<Affine> {
        match (func, params) {
            (Func::SymReflect, [Param::Axis(a)]) => vec![Affine::IDENTITY, reflect_axis(*a)],
            (Func::SymRotate, [Param::Count(n)]) => (0..*n)
                .map(|k| Affine::linear(rot_z(-2.0 * PI * f64::from(k) / f64::from(*n))))
                .collect(),
            (Func::SymTranslate, [Param::Count(n), x, y]) => {
                let (dx, dy) = (self.q(x), self.q(y));
                (0..*n)
                    .map(|k| {
                        let k = f64::from(k);
                        Affine::translate([-k * dx, -k * dy, 0.0])
                    })
                    .collect()
            }
            _ => unreachable!("not a symmetry op: {func:?}"),
        }
    }

    fn layers(&self, e: &Expr, frame: &Frame, out: &mut Vec<Leaf>) -> Result<(), ExecError> {
        match &e.node {
            Node::Comb { children, .. } => {
                self.layers(&children[0], frame, out)?;
                self.layers(&children[1], frame, out)
            }
            Node::Transform { func: Func::Color, params, child } => {
                let Param::Color(c) = params[0] else { unreachable!() };
                self.layers(child, &Frame { color: Some(c), ..*frame }, out)
            }
            Node::Transform { func: func @ (Func::SymReflect | Func::SymRotate | Func::SymTranslate), params, child } => {
                for copy in self.symmetry_copies(*func, params) {
                    self.layers(child, &frame.push(&copy), out)?;
                }
                Ok(())
            }
            Node::Transform { func, params, child } => {
                self.layers(child, &self.transform_frame(frame, *func, params)?, out)
            }
            Node::Prim { shape } => {
                out.push(Leaf {
                    to_local: frame.to_local,
                    shape: *shape,
                    color: frame.color.map_or(Color::Gray, Color::from),
                });
                Ok(())
            }
        }
    }

    fn csg(&self, e: &Expr, frame: &Frame) -> Result<CsgNode, ExecError> {
        match &e.node {
            Node::Comb { op, children } => Ok(CsgNode::Op(
                *op,
                Box::new(self.csg(&children[0], frame)?),
                Box::new(self.csg(&children[1], frame)?),
            )),
            Node::Transform { func, params, child } => {
                self.csg(child, &self.transform_frame(frame, *func, params)?)
            }
            Node::Prim { shape } => Ok(CsgNode::Leaf(Leaf {
                to_local: frame.to_local,
                shape: *shape,
                color: Color::Gray,
            })),
        }
    }
}

/// Compiles a program into a [`Scene`].
pub fn compile(program: &Program) -> Result<Scene, ExecError> {
    let leaves = program.top_level().iter().fold(0u64, |acc, e| acc.saturating_add(leaf_count(e)));
    if leaves > MAX_LEAVES {
        return Err(ExecError::TooComplex(leaves));
    }
    let c = Compiler { quant: program.quant(), domain: program.domain() };
    let kind = match program.body() {
        Body::Layout(e) => {
            let mut leaves = Vec::new();
            c.layers(e, &Frame::ROOT, &mut leaves)?;
            SceneKind::Layers(leaves)
        }
        Body::Csg { pos, neg } => {
            let build = |items: &[Expr]| items.iter().map(|e| c.csg(e, &Frame::ROOT)).collect::<Result<Vec<_>, _>>();
            SceneKind::Csg { pos: build(&pos.items)?, neg: build(&neg.items)? }
        }
    };
    Ok(Scene { domain: program.domain(), kind })
}

/// Center of a 2D cell; row 0 is the top of the canvas.
pub fn pixel_center(col: usize, row: usize) -> [f64; 2] {
    let h = 1.0 / (SIZE_2D as f64 / 2.0);
    [-1.0 + (col as f64 + 0.5) * h, 1.0 - (row as f64 + 0.5) * h]
}

pub fn voxel_center(x: usize, y: usize, z: usize) -> [f64; 3] {
    let h = 1.0 / (SIZE_3D as f64 / 2.0);
    let c = |i: usize| -1.0 + (i as f64 + 0.5) * h;
    [c(x), c(y), c(z)]
}

impl Scene {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Layout color at a point; background when no primitive covers it.
    /// For CSG scenes, `Gray` marks occupied points.
    pub fn color_at(&self, p: [f64; 3]) -> Color {
        match &self.kind {
            SceneKind::Layers(leaves) => {
                leaves.iter().find(|l| l.contains(p)).map_or(Color::Background, |l| l.color)
            }
            SceneKind::Csg { .. } => {
                if self.occupied_at(p) {
                    Color::Gray
                } else {
                    Color::Background
                }
            }
        }
    }

    pub fn occupied_at(&self, p: [f64; 3]) -> bool {
        match &self.kind {
            SceneKind::Layers(leaves) => leaves.iter().any(|l| l.contains(p)),
            SceneKind::Csg { pos, neg } => {
                pos.iter().any(|n| n.contains(p)) && !neg.iter().any(|n| n.contains(p))
            }
        }
    }

    /// Rasterizes the scene, visiting only the cells inside each leaf's
    /// bounding box. Agrees with [`Scene::render_pointwise`] cell for cell.
    pub fn render(&self) -> Visual {
        match (&self.kind, self.domain) {
            (SceneKind::Layers(leaves), _) => {
                let n = SIZE_2D;
                let mut cells = vec![Color::Background; n * n];
                // paint bottom to top so the topmost leaf wins
                for leaf in leaves.iter().rev() {
                    let b = leaf.bounds();
                    for row in cell_range(b[1][0], b[1][1], n, true) {
                        for col in cell_range(b[0][0], b[0][1], n, false) {
                            let [x, y] = pixel_center(col, row);
                            if leaf.contains([x, y, 0.0]) {
                                cells[row * n + col] = leaf.color;
                            }
                        }
                    }
                }
                Visual::Layout(Canvas::from_cells(cells))
            }
            (SceneKind::Csg { pos, neg }, Domain::Csg3d) => {
                let n = SIZE_3D;
                let mut cells = vec![false; n * n * n];
                for (nodes, value) in [(pos, true), (neg, false)] {
                    for node in nodes {
                        let b = node.bounds();
                        for z in cell_range(b[2][0], b[2][1], n, false) {
                            for y in cell_range(b[1][0], b[1][1], n, false) {
                                for x in cell_range(b[0][0], b[0][1], n, false) {
                                    let i = x + n * (y + n * z);
                                    if cells[i] != value && node.contains(voxel_center(x, y, z)) {
                                        cells[i] = value;
                                    }
                                }
                            }
                        }
                    }
                }
                Visual::Csg3d(Grid::from_cells(n, 3, cells))
            }
            (SceneKind::Csg { pos, neg }, _) => {
                let n = SIZE_2D;
                let mut cells = vec![false; n * n];
                for (nodes, value) in [(pos, true), (neg, false)] {
                    for node in nodes {
                        let b = node.bounds();
                        for row in cell_range(b[1][0], b[1][1], n, true) {
                            for col in cell_range(b[0][0], b[0][1], n, false) {
                                let [x, y] = pixel_center(col, row);
                                let i = row * n + col;
                                if cells[i] != value && node.contains([x, y, 0.0]) {
                                    cells[i] = value;
                                }
                            }
                        }
                    }
                }
                Visual::Csg2d(Grid::from_cells(n, 2, cells))
            }
        }
    }

    /// Samples every cell independently through [`Scene::color_at`] and
    /// [`Scene::occupied_at`]. Slow; kept as the reference for [`Scene::render`].
    pub fn render_pointwise(&self) -> Visual {
        match self.domain {
            Domain::Layout => {
                let mut cells = Vec::with_capacity(SIZE_2D * SIZE_2D);
                for row in 0..SIZE_2D {
                    for col in 0..SIZE_2D {
                        let [x, y] = pixel_center(col, row);
                        cells.push(self.color_at([x, y, 0.0]));
                    }
                }
                Visual::Layout(Canvas::from_cells(cells))
            }
            Domain::Csg2d => {
                let mut cells = Vec::with_capacity(SIZE_2D * SIZE_2D);
                for row in 0..SIZE_2D {
                    for col in 0..SIZE_2D {
                        let [x, y] = pixel_center(col, row);
                        cells.push(self.occupied_at([x, y, 0.0]));
                    }
                }
                Visual::Csg2d(Grid::from_cells(SIZE_2D, 2, cells))
            }
            Domain::Csg3d => {
                let mut cells = Vec::with_capacity(SIZE_3D.pow(3));
                for z in 0..SIZE_3D {
                    for y in 0..SIZE_3D {
                        for x in 0..SIZE_3D {
                            cells.push(self.occupied_at(voxel_center(x, y, z)));
                        }
                    }
                }
                Visual::Csg3d(Grid::from_cells(SIZE_3D, 3, cells))
            }
        }
    }
}

/// Executes a program.
pub fn execute(program: &Program) -> Result<Visual, ExecError> {
    Ok(compile(program)?.render())
}

/// Executes a program and additionally rejects outputs that touch the canvas
/// border.
pub fn execute_strict(program: &Program) -> Result<Visual, ExecError> {
    let v = execute(program)?;
    if occupancy(&v).touches_border() {
        return Err(ExecError::OutOfCanvas);
    }
    Ok(v)
}

/// Executes many programs, in parallel when the `parallel` feature is on.
/// Output order matches input order.
pub fn execute_batch(programs: &[Program]) -> Vec<Result<Visual, ExecError>> {
    crate::par::map(programs, execute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_text;

    fn run(domain: Domain, text: &str) -> Visual {
        execute(&parse_text(text, domain, Quant::default()).unwrap()).unwrap()
    }

    /// Pixels whose centers satisfy |x| <= 0.5 and |y| <= 0.5.
    fn square_footprint() -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for row in 0..SIZE_2D {
            for col in 0..SIZE_2D {
                let [x, y] = pixel_center(col, row);
                if x.abs() <= 0.5 && y.abs() <= 0.5 {
                    out.push((col, row));
                }
            }
        }
        out
    }

    #[test]
    fn self_difference_is_empty() {
        let v = run(Domain::Csg2d, "POS(Difference(Prim(circle),Prim(circle))) NEG()");
        assert_eq!(occupancy(&v).count(), 0);
    }

    #[test]
    fn zero_move_is_identity() {
        let a = run(Domain::Csg2d, "POS(Move(0,0)(Prim(square))) NEG()");
        let b = run(Domain::Csg2d, "POS(Prim(square)) NEG()");
        assert_eq!(a, b);
    }

    #[test]
    fn red_square_matches_footprint() {
        let Visual::Layout(c) = run(Domain::Layout, "Color(red)(Prim(square))") else { panic!() };
        let fp = square_footprint();
        assert_eq!(fp.len(), 32 * 32);
        for row in 0..SIZE_2D {
            for col in 0..SIZE_2D {
                let want = if fp.contains(&(col, row)) { Color::Red } else { Color::Background };
                assert_eq!(c.get(col, row), want, "pixel ({col},{row})");
            }
        }
        let mask = occupancy(&Visual::Layout(c));
        assert_eq!(mask.count(), fp.len());
        assert!(fp.iter().all(|&(c, r)| mask.get(&[c, r])));
    }

    #[test]
    fn blank_canvas_has_empty_occupancy() {
        assert_eq!(occupancy(&Visual::blank(Domain::Layout)).count(), 0);
    }

    #[test]
    fn uncolored_prims_are_gray_and_first_union_arg_is_on_top() {
        let Visual::Layout(c) = run(Domain::Layout, "Union(Color(blue)(Prim(circle)),Prim(square))") else {
            panic!()
        };
        assert_eq!(c.get(32, 32), Color::Blue);
        // inside the square but outside the circle
        assert_eq!(c.get(17, 17), Color::Gray);
    }

    #[test]
    fn inner_color_wins() {
        let Visual::Layout(c) = run(Domain::Layout, "Color(red)(Color(green)(Prim(square)))") else { panic!() };
        assert_eq!(c.get(32, 32), Color::Green);
    }

    #[test]
    fn nested_scales_become_degenerate() {
        let p = parse_text(
            "POS(Scale(-1,-1)(Scale(-1,-1)(Scale(-1,-1)(Scale(-1,-1)(Prim(square)))))) NEG()",
            Domain::Csg2d,
            Quant::default(),
        )
        .unwrap();
        assert!(matches!(execute(&p), Err(ExecError::DegenerateScale(_))));
    }

    #[test]
    fn strict_mode_rejects_border_contact() {
        let p = parse_text("POS(Scale(1,1)(Prim(square))) NEG()", Domain::Csg2d, Quant::default()).unwrap();
        assert!(execute(&p).is_ok());
        assert_eq!(execute_strict(&p), Err(ExecError::OutOfCanvas));
    }

    #[test]
    fn voxel_cylinder_is_along_y() {
        let Visual::Csg3d(g) = run(Domain::Csg3d, "POS(Prim(cylinder)) NEG()") else { panic!() };
        // the axis passes through the center columns at any height within |y| <= 0.5
        assert!(g.get(&[15, 8, 15]));
        assert!(!g.get(&[15, 4, 15]));
        assert!(!g.get(&[2, 16, 15]));
    }

    #[test]
    fn culled_render_matches_pointwise() {
        use crate::sampler::{Sampler, SamplerConfig};
        for d in Domain::ALL {
            let mut cfg = SamplerConfig::new(d, 99);
            cfg.expr.scale_hi = 1.0;
            cfg.expr.move_range = 1.0;
            let mut s = Sampler::new(cfg);
            let n = if d == Domain::Csg3d { 60 } else { 300 };
            for _ in 0..n {
                let p = s.propose();
                if let Ok(scene) = compile(&p) {
                    assert_eq!(scene.render(), scene.render_pointwise(), "{p}");
                }
            }
        }
    }
}
