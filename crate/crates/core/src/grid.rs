//! Planar domains, uniform node lattices with cut-cell quadrature weights,
//! area / circle integrals and dyadic annulus decompositions.
//!
//! A [`Grid`] stores a rectangular array of lattice nodes covering the
//! bounding box of its [`Domain`]. Node `(i, j)` sits at
//! `origin + (i h, j h)` and has flat index `j * nx + i`. Every field in the
//! crate stores one value per array node; only nodes flagged `inside` carry
//! meaningful data for solved fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> T {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }
}

impl<T: Real> std::ops::Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> std::ops::Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

/// A planar integration / discretization domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain<T> {
    Disk { center: Point<T>, radius: T },
    Annulus { center: Point<T>, inner: T, outer: T },
    /// Axis-aligned rectangle given by its center and full extents.
    Rectangle { center: Point<T>, width: T, height: T },
}

impl<T: Real> Domain<T> {
    pub fn disk(center: Point<T>, radius: T) -> Self {
        Domain::Disk { center, radius }
    }

    pub fn annulus(center: Point<T>, inner: T, outer: T) -> Self {
        Domain::Annulus { center, inner, outer }
    }

    /// Rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: T, x1: T, y0: T, y1: T) -> Self {
        let two = T::lit(2.0);
        Domain::Rectangle {
            center: Point::new((x0 + x1) / two, (y0 + y1) / two),
            width: x1 - x0,
            height: y1 - y0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Disk { radius, center } => radius > T::zero() && finite(center) && radius.is_finite(),
            Domain::Annulus { inner, outer, center } => {
                inner > T::zero() && inner < outer && finite(center) && outer.is_finite()
            }
            Domain::Rectangle { width, height, center } => {
                width > T::zero() && height > T::zero() && finite(center) && width.is_finite() && height.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid domain {self:?}")))
        }
    }

    pub fn center(&self) -> Point<T> {
        match *self {
            Domain::Disk { center, .. } | Domain::Annulus { center, .. } | Domain::Rectangle { center, .. } => center,
        }
    }

    /// Radius for disks, ring width for annuli, smaller extent for rectangles.
    pub fn min_dimension(&self) -> T {
        match *self {
            Domain::Disk { radius, .. } => radius,
            Domain::Annulus { inner, outer, .. } => outer - inner,
            Domain::Rectangle { width, height, .. } => width.min(height),
        }
    }

    pub fn area(&self) -> T {
        match *self {
            Domain::Disk { radius, .. } => T::PI() * radius * radius,
            Domain::Annulus { inner, outer, .. } => T::PI() * (outer * outer - inner * inner),
            Domain::Rectangle { width, height, .. } => width * height,
        }
    }

    /// `(xmin, xmax, ymin, ymax)`.
    pub fn bbox(&self) -> (T, T, T, T) {
        let two = T::lit(2.0);
        match *self {
            Domain::Disk { center: c, radius: r } | Domain::Annulus { center: c, outer: r, .. } => {
                (c.x - r, c.x + r, c.y - r, c.y + r)
            }
            Domain::Rectangle { center: c, width, height } => {
                (c.x - width / two, c.x + width / two, c.y - height / two, c.y + height / two)
            }
        }
    }

    fn scale(&self) -> T {
        let (x0, x1, y0, y1) = self.bbox();
        (x1 - x0).max(y1 - y0)
    }

    /// Closed membership test with a relative tolerance of `1e-12`.
    pub fn contains(&self, p: Point<T>) -> bool {
        let tol = T::lit(1e-12) * self.scale();
        match *self {
            Domain::Disk { center, radius } => p.dist(center) <= radius + tol,
            Domain::Annulus { center, inner, outer } => {
                let r = p.dist(center);
                r >= inner - tol && r <= outer + tol
            }
            Domain::Rectangle { .. } => {
                let (x0, x1, y0, y1) = self.bbox();
                p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol
            }
        }
    }

    /// Strict interior membership (points on the boundary are excluded).
    fn contains_strictly(&self, p: Point<T>) -> bool {
        let tol = T::lit(1e-12) * self.scale();
        match *self {
            Domain::Disk { center, radius } => p.dist(center) < radius - tol,
            Domain::Annulus { center, inner, outer } => {
                let r = p.dist(center);
                r > inner + tol && r < outer - tol
            }
            Domain::Rectangle { .. } => {
                let (x0, x1, y0, y1) = self.bbox();
                p.x > x0 + tol && p.x < x1 - tol && p.y > y0 + tol && p.y < y1 - tol
            }
        }
    }

    /// Approximate containment of another domain, by sampling its boundary.
    pub fn contains_domain(&self, other: &Domain<T>) -> bool {
        let samples = 720;
        let on_boundary = |d: &Domain<T>| -> Vec<Point<T>> {
            match *d {
                Domain::Disk { center, radius } => circle_points(center, radius, samples),
                Domain::Annulus { center, inner, outer } => {
                    let mut v = circle_points(center, outer, samples);
                    v.extend(circle_points(center, inner, samples));
                    v
                }
                Domain::Rectangle { .. } => {
                    let (x0, x1, y0, y1) = d.bbox();
                    let n = samples / 4;
                    let mut v = Vec::with_capacity(4 * n + 4);
                    for k in 0..=n {
                        let t = T::from_usize_lossy(k) / T::from_usize_lossy(n);
                        let x = x0 + (x1 - x0) * t;
                        let y = y0 + (y1 - y0) * t;
                        v.push(Point::new(x, y0));
                        v.push(Point::new(x, y1));
                        v.push(Point::new(x0, y));
                        v.push(Point::new(x1, y));
                    }
                    v
                }
            }
        };
        if !on_boundary(other).into_iter().all(|p| self.contains(p)) {
            return false;
        }
        if let Domain::Annulus { center, inner, .. } = *self {
            // the hole must not be covered by `other`
            if other.contains_strictly(center) {
                return false;
            }
            if circle_points(center, inner, samples).into_iter().any(|p| other.contains_strictly(p)) {
                return false;
            }
        }
        true
    }

    /// Outward unit normal used at boundary nodes. For annuli the normal at
    /// the inner ring points toward the center.
    pub fn outward_normal(&self, p: Point<T>) -> Point<T> {
        match *self {
            Domain::Disk { center, .. } => unit_or_x(p - center),
            Domain::Annulus { center, inner, outer } => {
                let d = p - center;
                let r = d.norm();
                if (r - inner).abs() < (outer - r).abs() {
                    unit_or_x(d).scale(-T::one())
                } else {
                    unit_or_x(d)
                }
            }
            Domain::Rectangle { .. } => {
                let (x0, x1, y0, y1) = self.bbox();
                let gaps = [p.x - x0, x1 - p.x, p.y - y0, y1 - p.y];
                let normals = [(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)];
                let m = gaps.iter().copied().fold(T::infinity(), T::min);
                let tie = T::lit(1e-9) * self.scale();
                let mut n = Point::origin();
                for (g, (nx, ny)) in gaps.iter().zip(normals) {
                    if (*g - m).abs() <= tie {
                        n = n + Point::new(T::lit(nx), T::lit(ny));
                    }
                }
                unit_or_x(n)
            }
        }
    }

    /// Exact area of `[x0, x1] × [y0, y1] ∩ self`.
    pub fn overlap_area(&self, x0: T, x1: T, y0: T, y1: T) -> T {
        match *self {
            Domain::Disk { center, radius } => rect_disk_area(x0 - center.x, x1 - center.x, y0 - center.y, y1 - center.y, radius),
            Domain::Annulus { center, inner, outer } => {
                let (a, b, c, d) = (x0 - center.x, x1 - center.x, y0 - center.y, y1 - center.y);
                (rect_disk_area(a, b, c, d, outer) - rect_disk_area(a, b, c, d, inner)).max(T::zero())
            }
            Domain::Rectangle { .. } => {
                let (rx0, rx1, ry0, ry1) = self.bbox();
                let w = (x1.min(rx1) - x0.max(rx0)).max(T::zero());
                let h = (y1.min(ry1) - y0.max(ry0)).max(T::zero());
                w * h
            }
        }
    }
}

fn finite<T: Real>(p: Point<T>) -> bool {
    p.x.is_finite() && p.y.is_finite()
}

fn unit_or_x<T: Real>(v: Point<T>) -> Point<T> {
    let n = v.norm();
    if n > T::zero() {
        v.scale(T::one() / n)
    } else {
        Point::new(T::one(), T::zero())
    }
}

fn circle_points<T: Real>(center: Point<T>, radius: T, n: usize) -> Vec<Point<T>> {
    (0..n)
        .map(|k| {
            let t = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n);
            Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
        })
        .collect()
}

/// `∫₀ᵗ √(R² − s²) ds`.
fn half_chord_primitive<T: Real>(t: T, r: T) -> T {
    let t = t.max(-r).min(r);
    let half = T::lit(0.5);
    half * (t * (r * r - t * t).max(T::zero()).sqrt() + r * r * (t / r).asin())
}

/// Area of `{(s, t) : s ≤ x, t ≤ y, s² + t² ≤ R²}`.
fn corner_area<T: Real>(x: T, y: T, r: T) -> T {
    if x <= -r || y <= -r {
        return T::zero();
    }
    let x = x.min(r);
    let s = |t: T| half_chord_primitive(t, r);
    if y >= r {
        return T::lit(2.0) * (s(x) - s(-r));
    }
    let ts = (r * r - y * y).max(T::zero()).sqrt();
    // integrate g over [a, b] ∩ (-r, x]
    let clip = |a: T, b: T| -> Option<(T, T)> {
        let b = b.min(x);
        if b > a {
            Some((a, b))
        } else {
            None
        }
    };
    let full = |a: T, b: T| T::lit(2.0) * (s(b) - s(a));
    let partial = |a: T, b: T| y * (b - a) + s(b) - s(a);
    let mut area = T::zero();
    if y >= T::zero() {
        if let Some((a, b)) = clip(-r, -ts) {
            area = area + full(a, b);
        }
        if let Some((a, b)) = clip(-ts, ts) {
            area = area + partial(a, b);
        }
        if let Some((a, b)) = clip(ts, r) {
            area = area + full(a, b);
        }
    } else if let Some((a, b)) = clip(-ts, ts) {
        area = area + partial(a, b);
    }
    area.max(T::zero())
}

/// Exact area of a rectangle intersected with the disk of radius `r` centered at the origin.
fn rect_disk_area<T: Real>(x0: T, x1: T, y0: T, y1: T, r: T) -> T {
    // cheap exits: fully outside / fully inside
    let dx = if x0 > T::zero() { x0 } else if x1 < T::zero() { -x1 } else { T::zero() };
    let dy = if y0 > T::zero() { y0 } else if y1 < T::zero() { -y1 } else { T::zero() };
    if dx * dx + dy * dy >= r * r {
        return T::zero();
    }
    let fx = x0.abs().max(x1.abs());
    let fy = y0.abs().max(y1.abs());
    if fx * fx + fy * fy <= r * r {
        return (x1 - x0) * (y1 - y0);
    }
    let a = corner_area(x1, y1, r) - corner_area(x0, y1, r) - corner_area(x1, y0, r) + corner_area(x0, y0, r);
    a.max(T::zero()).min((x1 - x0) * (y1 - y0))
}

/// Integration region: an area domain or a circle (line integral).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region<T> {
    Area(Domain<T>),
    Circle { center: Point<T>, radius: T },
}

/// Declared power-law growth `f ~ c |x − center|^{−exponent}` at a singular point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularCenter<T> {
    pub center: Point<T>,
    pub exponent: T,
}

/// Annulus `B_{2t}(center) ∖ B_t(center)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus<T> {
    pub center: Point<T>,
    pub inner: T,
}

impl<T: Real> Annulus<T> {
    pub fn outer(&self) -> T {
        self.inner + self.inner
    }

    pub fn domain(&self) -> Domain<T> {
        Domain::annulus(self.center, self.inner, self.outer())
    }
}

/// Serialized grid header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor<T> {
    #[serde(flatten)]
    pub domain: Domain<T>,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub origin: Point<T>,
}

#[derive(Clone, Debug)]
pub struct Grid<T> {
    domain: Domain<T>,
    h: T,
    origin: Point<T>,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
    interior: Vec<bool>,
    boundary: Vec<bool>,
    weights: Vec<T>,
}

/// Builds a grid with lattice anchored at the domain center (disk, annulus)
/// or lower-left corner (rectangle).
pub fn make_grid<T: Real>(domain: Domain<T>, h: T) -> Result<Grid<T>> {
    let anchor = match domain {
        Domain::Rectangle { .. } => {
            let (x0, _, y0, _) = domain.bbox();
            Point::new(x0, y0)
        }
        _ => domain.center(),
    };
    Grid::with_anchor(domain, h, anchor)
}

impl<T: Real> Grid<T> {
    /// Builds a grid whose lattice passes through `anchor`.
    pub fn with_anchor(domain: Domain<T>, h: T, anchor: Point<T>) -> Result<Self> {
        domain.validate()?;
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
        }
        if !(h < domain.min_dimension() / T::lit(8.0)) {
            return Err(Error::Config(format!(
                "grid spacing {h} too coarse: need fewer than 1/8 of the smallest domain dimension {}",
                domain.min_dimension()
            )));
        }
        let (x0, x1, y0, y1) = domain.bbox();
        let half = T::lit(0.5);
        let eps = T::lit(1e-9);
        // keep lattice index i iff its cell meets the bbox with positive length
        let range = |lo: T, hi: T, a: T| -> (i64, i64) {
            let first = ((lo - a) / h - half + eps).floor().to_i64().unwrap_or(0) + 1;
            let last = ((hi - a) / h + half - eps).ceil().to_i64().unwrap_or(0) - 1;
            (first, last)
        };
        let (i0, i1) = range(x0, x1, anchor.x);
        let (j0, j1) = range(y0, y1, anchor.y);
        if i1 < i0 || j1 < j0 {
            return Err(Error::Config("empty lattice".into()));
        }
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let origin = Point::new(
            anchor.x + h * T::from_i64(i0).unwrap_or_else(T::zero),
            anchor.y + h * T::from_i64(j0).unwrap_or_else(T::zero),
        );
        let mut grid = Grid {
            domain,
            h,
            origin,
            nx,
            ny,
            inside: vec![false; nx * ny],
            interior: vec![false; nx * ny],
            boundary: vec![false; nx * ny],
            weights: vec![T::zero(); nx * ny],
        };
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.index(i, j);
                grid.inside[k] = domain.contains(grid.node(i, j));
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.index(i, j);
                if !grid.inside[k] {
                    continue;
                }
                let full = i > 0
                    && i + 1 < nx
                    && j > 0
                    && j + 1 < ny
                    && grid.inside[k - 1]
                    && grid.inside[k + 1]
                    && grid.inside[k - nx]
                    && grid.inside[k + nx];
                grid.interior[k] = full;
                grid.boundary[k] = !full;
            }
        }
        let min_nodes = 5;
        if nx < min_nodes || ny < min_nodes {
            return Err(Error::Config("grid has fewer than 5 nodes per axis".into()));
        }
        let inside = grid.inside.clone();
        grid.weights = grid.cut_cell_weights(&domain, &inside)?;
        Ok(grid)
    }

    pub fn from_descriptor(d: &GridDescriptor<T>) -> Result<Self> {
        let g = Self::with_anchor(d.domain, d.h, d.origin)?;
        if g.nx != d.nx || g.ny != d.ny {
            return Err(Error::Format(format!(
                "grid descriptor inconsistent: header {}x{}, rebuilt {}x{}",
                d.nx, d.ny, g.nx, g.ny
            )));
        }
        Ok(g)
    }

    pub fn descriptor(&self) -> GridDescriptor<T> {
        GridDescriptor { domain: self.domain, h: self.h, nx: self.nx, ny: self.ny, origin: self.origin }
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn origin(&self) -> Point<T> {
        self.origin
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Point<T> {
        Point::new(
            self.origin.x + self.h * T::from_usize_lossy(i),
            self.origin.y + self.h * T::from_usize_lossy(j),
        )
    }

    #[inline]
    pub fn point(&self, k: usize) -> Point<T> {
        let (i, j) = self.ij(k);
        self.node(i, j)
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Same lattice and domain; used to check field compatibility.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        std::ptr::eq(self, other)
            || (self.domain == other.domain
                && self.h == other.h
                && self.origin == other.origin
                && self.nx == other.nx
                && self.ny == other.ny)
    }

    /// Cut-cell weights of `shape` restricted to nodes selected by `member`.
    /// Cell area of non-member nodes that overlaps `shape` is moved to the
    /// closest member among the eight neighbors.
    fn cut_cell_weights(&self, shape: &Domain<T>, member: &[bool]) -> Result<Vec<T>> {
        let mut w = vec![T::zero(); self.len()];
        let half = self.h * T::lit(0.5);
        let (i0, i1, j0, j1) = self.index_window(shape);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let p = self.node(i, j);
                let a = shape.overlap_area(p.x - half, p.x + half, p.y - half, p.y + half);
                if a <= T::zero() {
                    continue;
                }
                let k = self.index(i, j);
                if member[k] {
                    w[k] = w[k] + a;
                } else if let Some(t) = self.nearest_member(i, j, member) {
                    w[t] = w[t] + a;
                }
            }
        }
        Ok(w)
    }

    fn nearest_member(&self, i: usize, j: usize, member: &[bool]) -> Option<usize> {
        let p = self.node(i, j);
        let mut best: Option<(T, usize)> = None;
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 || (di == 0 && dj == 0) {
                    continue;
                }
                let k = self.index(ii as usize, jj as usize);
                if member[k] {
                    let d = self.point(k).dist(p);
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, k));
                    }
                }
            }
        }
        best.map(|(_, k)| k)
    }

    /// Inclusive index window of nodes whose cells may touch `shape`.
    fn index_window(&self, shape: &Domain<T>) -> (usize, usize, usize, usize) {
        let (x0, x1, y0, y1) = shape.bbox();
        let clamp = |v: T, n: usize| -> usize {
            let v = v.floor().to_i64().unwrap_or(0);
            v.clamp(0, n as i64 - 1) as usize
        };
        let one = T::one();
        (
            clamp((x0 - self.origin.x) / self.h - one, self.nx),
            clamp((x1 - self.origin.x) / self.h + one + one, self.nx),
            clamp((y0 - self.origin.y) / self.h - one, self.ny),
            clamp((y1 - self.origin.y) / self.h + one + one, self.ny),
        )
    }

    /// Sparse cut-cell weights `(node, weight)` for a sub-domain of the grid.
    pub fn region_weights(&self, region: &Domain<T>) -> Result<Vec<(usize, T)>> {
        self.region_weights_excising(region, None)
    }

    fn region_weights_excising(&self, region: &Domain<T>, hole: Option<(Point<T>, T)>) -> Result<Vec<(usize, T)>> {
        region.validate()?;
        if !self.domain.contains_domain(region) {
            return Err(Error::Domain(format!("region {region:?} exceeds grid domain {:?}", self.domain)));
        }
        let (i0, i1, j0, j1) = self.index_window(region);
        let mut member = vec![false; self.len()];
        for j in j0..=j1 {
            for i in i0..=i1 {
                let k = self.index(i, j);
                let p = self.node(i, j);
                let out_of_hole = hole.is_none_or(|(c, r)| p.dist(c) > r);
                member[k] = self.inside[k] && region.contains(p) && out_of_hole;
            }
        }
        let mut dense = self.cut_cell_weights(region, &member)?;
        if let Some((c, r)) = hole {
            let disk = Domain::disk(c, r);
            let excised = self.cut_cell_weights(&disk, &member)?;
            for (d, e) in dense.iter_mut().zip(excised) {
                *d = (*d - e).max(T::zero());
            }
        }
        Ok(dense
            .into_iter()
            .enumerate()
            .filter(|(_, w)| *w > T::zero())
            .collect())
    }

    /// Integrates sampled values over an area region or around a circle.
    pub fn integrate(&self, values: &[T], region: &Region<T>) -> Result<T> {
        self.check_len(values)?;
        match *region {
            Region::Area(d) => {
                let w = self.region_weights(&d)?;
                let terms: Vec<T> = w.iter().map(|&(k, wk)| wk * values[k]).collect();
                Ok(pairwise_sum(&terms))
            }
            Region::Circle { center, radius } => self.circle_integral(values, center, radius, &self.inside),
        }
    }

    /// Area integral with a declared power-law singularity: the ball
    /// `B_{2h}(center)` is excised and replaced by `∫ c r^{−s}` with `c` fitted
    /// from circle averages on the two nearest rings outside it.
    pub fn integrate_singular(&self, values: &[T], region: &Domain<T>, singular: &SingularCenter<T>) -> Result<T> {
        self.check_len(values)?;
        let s = singular.exponent;
        if !(s < T::lit(2.0)) {
            return Err(Error::Argument(format!("non-integrable growth exponent {s}")));
        }
        let two_h = self.h + self.h;
        let c = singular.center;
        if !region.contains_domain(&Domain::disk(c, two_h * T::lit(2.0))) {
            return Err(Error::Domain("singular center too close to region boundary".into()));
        }
        let w = self.region_weights_excising(region, Some((c, two_h)))?;
        let terms: Vec<T> = w.iter().map(|&(k, wk)| wk * values[k]).collect();
        let regular = pairwise_sum(&terms);
        let rings = [T::lit(2.5) * self.h, T::lit(3.5) * self.h];
        let mut coef = T::zero();
        for &r in &rings {
            let avg = self.circle_integral(values, c, r, &self.inside)? / (T::TAU() * r);
            coef = coef + avg * r.powf(s);
        }
        coef = coef / T::lit(2.0);
        let two = T::lit(2.0);
        let correction = coef * T::TAU() * two_h.powf(two - s) / (two - s);
        Ok(regular + correction)
    }

    fn check_len(&self, values: &[T]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Argument(format!(
                "value array has {} entries, grid has {}",
                values.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Bilinear interpolation; all four cell corners must be flagged in `valid`.
    pub fn interpolate(&self, values: &[T], p: Point<T>, valid: &[bool]) -> Result<T> {
        let fx = (p.x - self.origin.x) / self.h;
        let fy = (p.y - self.origin.y) / self.h;
        let i = fx.floor();
        let j = fy.floor();
        let (Some(ii), Some(jj)) = (i.to_i64(), j.to_i64()) else {
            return Err(Error::Domain(format!("point ({}, {}) not finite", p.x, p.y)));
        };
        if ii < 0 || jj < 0 || ii + 1 >= self.nx as i64 || jj + 1 >= self.ny as i64 {
            return Err(Error::Domain(format!("point ({}, {}) outside grid", p.x, p.y)));
        }
        let (ii, jj) = (ii as usize, jj as usize);
        let (tx, ty) = (fx - i, fy - j);
        let k00 = self.index(ii, jj);
        let ks = [k00, k00 + 1, k00 + self.nx, k00 + self.nx + 1];
        if ks.iter().any(|&k| !valid[k]) {
            return Err(Error::Domain(format!("point ({}, {}) outside valid region", p.x, p.y)));
        }
        let one = T::one();
        Ok(values[ks[0]] * (one - tx) * (one - ty)
            + values[ks[1]] * tx * (one - ty)
            + values[ks[2]] * (one - tx) * ty
            + values[ks[3]] * tx * ty)
    }

    /// Number of trapezoid samples used for a circle of radius `radius`.
    pub fn circle_sample_count(&self, radius: T) -> usize {
        let n = (T::TAU() * radius / self.h).ceil().to_usize().unwrap_or(64);
        n.max(64)
    }

    /// Periodic trapezoid nodes `(point, outward normal, arc-length weight)`.
    pub fn circle_samples(&self, center: Point<T>, radius: T) -> Vec<(Point<T>, Point<T>, T)> {
        let n = self.circle_sample_count(radius);
        let dw = T::TAU() * radius / T::from_usize_lossy(n);
        (0..n)
            .map(|k| {
                let t = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n);
                let nu = Point::new(t.cos(), t.sin());
                (center + nu.scale(radius), nu, dw)
            })
            .collect()
    }

    /// `∮_{∂B_R(center)} f ds` by the periodic trapezoid rule.
    pub fn circle_integral(&self, values: &[T], center: Point<T>, radius: T, valid: &[bool]) -> Result<T> {
        self.check_len(values)?;
        if !(radius > T::zero()) {
            return Err(Error::Argument(format!("circle radius must be positive, got {radius}")));
        }
        let terms = self
            .circle_samples(center, radius)
            .into_iter()
            .map(|(p, _, w)| self.interpolate(values, p, valid).map(|v| v * w))
            .collect::<Result<Vec<T>>>()?;
        Ok(pairwise_sum(&terms))
    }

    /// Index of the lattice node closest to `p` (clamped into the array).
    pub fn nearest_node(&self, p: Point<T>) -> usize {
        let fi = ((p.x - self.origin.x) / self.h).round().to_i64().unwrap_or(0);
        let fj = ((p.y - self.origin.y) / self.h).round().to_i64().unwrap_or(0);
        let i = fi.clamp(0, self.nx as i64 - 1) as usize;
        let j = fj.clamp(0, self.ny as i64 - 1) as usize;
        self.index(i, j)
    }
}

/// Dyadic annuli `B_{2t} ∖ B_t` with `t = r_min 2^k` and `2t ≤ r_max`.
pub fn dyadic_annuli<T: Real>(center: Point<T>, r_min: T, r_max: T) -> Result<Vec<Annulus<T>>> {
    if !(r_min > T::zero()) || !(r_min < r_max) {
        return Err(Error::Argument(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
    }
    let slack = T::one() + T::lit(1e-12);
    let mut out = Vec::new();
    let mut t = r_min;
    while t + t <= r_max * slack {
        out.push(Annulus { center, inner: t });
        t = t + t;
    }
    Ok(out)
}
