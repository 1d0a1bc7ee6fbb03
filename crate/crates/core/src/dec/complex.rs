use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HopfError, Result};

/// Largest number of top simplices a builder will produce.
pub const MAX_TOP_SIMPLICES: usize = 1 << 22;

/// Sorted table of `k`-simplices, each stored as an increasing vertex tuple.
#[derive(Clone, Debug)]
pub struct SimplexTable {
    width: usize,
    verts: Vec<u32>,
}

impl SimplexTable {
    fn from_sorted_tuples(width: usize, mut tuples: Vec<u32>) -> Self {
        let mut chunks: Vec<&[u32]> = tuples.chunks_exact(width).collect();
        chunks.sort_unstable();
        chunks.dedup();
        let verts: Vec<u32> = chunks.concat();
        tuples.clear();
        Self { width, verts }
    }

    pub fn len(&self) -> usize {
        self.verts.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.verts[i * self.width..(i + 1) * self.width]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.verts.chunks_exact(self.width)
    }

    /// Index of an increasing vertex tuple.
    pub fn find(&self, tuple: &[u32]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

/// An oriented simplicial complex with all skeleta and signed incidence.
///
/// Every simplex is stored with its vertices in increasing global order; this
/// order is the one the Alexander-Whitney cup product uses. Top simplices carry
/// an orientation sign relating the stored order to the global orientation.
#[derive(Debug)]
pub struct SimplicialComplex {
    dim: usize,
    ambient: usize,
    coords: Vec<f64>,
    skeleta: Vec<SimplexTable>,
    /// `faces[k]` lists, for each `k`-simplex, the ids of its `k+1` faces with
    /// face `i` obtained by dropping vertex `i` (incidence sign `(-1)^i`).
    faces: Vec<Vec<u32>>,
    orientation: Vec<i8>,
    weights: Vec<OnceLock<Vec<f64>>>,
    volumes: Vec<OnceLock<Vec<f64>>>,
}

fn permutation_parity(tuple: &[u32]) -> i8 {
    let mut sign = 1;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            if tuple[i] > tuple[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn det(m: DMatrix<f64>) -> f64 {
    m.determinant()
}

impl SimplicialComplex {
    /// Build a complex from its top simplices.
    ///
    /// `orientation[i]` is the sign of `top[i]` *as given*; when omitted it is
    /// computed from the geometry: for flat meshes (`ambient == dim`) from the
    /// sign of the edge-vector determinant, for hypersurface meshes
    /// (`ambient == dim + 1`) from `det[v_0, ..., v_dim]`, which orients a sphere
    /// about the origin by its outward normal.
    pub fn from_top_simplices(
        dim: usize,
        ambient: usize,
        coords: Vec<f64>,
        top: &[Vec<u32>],
        orientation: Option<&[i8]>,
    ) -> Result<Self> {
        if ambient == 0 || !coords.len().is_multiple_of(ambient) {
            return Err(HopfError::InvalidMesh(
                "coordinate array does not match ambient dimension".into(),
            ));
        }
        let nv = coords.len() / ambient;
        if let Some(o) = orientation {
            if o.len() != top.len() {
                return Err(HopfError::InvalidMesh("orientation count mismatch".into()));
            }
        }
        let mut signed: Vec<(Vec<u32>, i8)> = Vec::with_capacity(top.len());
        for (i, s) in top.iter().enumerate() {
            if s.len() != dim + 1 {
                return Err(HopfError::InvalidMesh(format!(
                    "top simplex {i} has {} vertices, expected {}",
                    s.len(),
                    dim + 1
                )));
            }
            if s.iter().any(|&v| v as usize >= nv) {
                return Err(HopfError::InvalidMesh(format!(
                    "top simplex {i} references a missing vertex"
                )));
            }
            let parity = permutation_parity(s);
            let mut sorted = s.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(HopfError::InvalidMesh(format!(
                    "top simplex {i} repeats a vertex"
                )));
            }
            let sign = match orientation {
                Some(o) => {
                    if o[i] != 1 && o[i] != -1 {
                        return Err(HopfError::InvalidMesh(
                            "orientation must be +1 or -1".into(),
                        ));
                    }
                    o[i] * parity
                }
                None => geometric_sign(dim, ambient, &coords, &sorted)?,
            };
            signed.push((sorted, sign));
        }
        signed.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        if signed.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(HopfError::InvalidMesh("duplicate top simplex".into()));
        }
        let orientation: Vec<i8> = signed.iter().map(|(_, s)| *s).collect();

        let mut skeleta = Vec::with_capacity(dim + 1);
        let top_table = SimplexTable {
            width: dim + 1,
            verts: signed.iter().flat_map(|(s, _)| s.iter().copied()).collect(),
        };
        // build downwards: faces of k-simplices give the (k-1)-skeleton
        let mut tables = vec![top_table];
        for k in (0..dim).rev() {
            let upper = tables.last().expect("non-empty");
            let mut raw = Vec::with_capacity(upper.len() * (k + 2) * (k + 1));
            for s in upper.iter() {
                for drop in 0..s.len() {
                    raw.extend(
                        s.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != drop)
                            .map(|(_, v)| *v),
                    );
                }
            }
            tables.push(SimplexTable::from_sorted_tuples(k + 1, raw));
        }
        tables.reverse();
        skeleta.extend(tables);

        if skeleta[0].len() != nv {
            return Err(HopfError::InvalidMesh(format!(
                "{} vertices are not used by any top simplex",
                nv - skeleta[0].len()
            )));
        }

        let mut faces = vec![Vec::new()];
        for k in 1..=dim {
            let lower = &skeleta[k - 1];
            let mut ids = Vec::with_capacity(skeleta[k].len() * (k + 1));
            let mut buf = Vec::with_capacity(k);
            for s in skeleta[k].iter() {
                for drop in 0..=k {
                    buf.clear();
                    buf.extend(
                        s.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != drop)
                            .map(|(_, v)| *v),
                    );
                    let id = lower.find(&buf).expect("face present in lower skeleton");
                    ids.push(id as u32);
                }
            }
            faces.push(ids);
        }

        Ok(Self {
            dim,
            ambient,
            coords,
            skeleta,
            faces,
            orientation,
            weights: (0..=dim).map(|_| OnceLock::new()).collect(),
            volumes: (0..=dim).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.ambient
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.ambient..(v + 1) * self.ambient]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn count(&self, k: usize) -> usize {
        self.skeleta.get(k).map_or(0, |t| t.len())
    }

    pub fn simplices(&self, k: usize) -> &SimplexTable {
        &self.skeleta[k]
    }

    pub fn top_simplices(&self) -> &SimplexTable {
        &self.skeleta[self.dim]
    }

    /// Face ids of `k`-simplex `i`; face `j` has incidence sign `(-1)^j`.
    pub fn faces_of(&self, k: usize, i: usize) -> &[u32] {
        &self.faces[k][i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    /// Simplex counts `f_0, ..., f_dim`.
    pub fn f_vector(&self) -> Vec<usize> {
        self.skeleta.iter().map(|t| t.len()).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    /// Signed boundary of the boundary, as an integer chain count; zero for
    /// every consistent complex.
    pub fn boundary_of_boundary_defect(&self) -> usize {
        let mut defect = 0;
        for k in 2..=self.dim {
            let mut acc: HashMap<u32, i64> = HashMap::new();
            for i in 0..self.count(k) {
                acc.clear();
                for (j, &f) in self.faces_of(k, i).iter().enumerate() {
                    let sj = if j % 2 == 0 { 1 } else { -1 };
                    for (l, &g) in self.faces_of(k - 1, f as usize).iter().enumerate() {
                        let sl = if l % 2 == 0 { 1 } else { -1 };
                        *acc.entry(g).or_default() += sj * sl;
                    }
                }
                defect += acc.values().filter(|v| **v != 0).count();
            }
        }
        defect
    }

    /// For each `(dim-1)`-simplex, the sum of induced orientation signs and the
    /// number of top simplices containing it.
    fn codim_one_incidence(&self) -> (Vec<i32>, Vec<u32>) {
        let n = self.count(self.dim - 1);
        let mut signs = vec![0i32; n];
        let mut counts = vec![0u32; n];
        for t in 0..self.count(self.dim) {
            for (j, &f) in self.faces_of(self.dim, t).iter().enumerate() {
                let s = if j % 2 == 0 { 1 } else { -1 };
                signs[f as usize] += s * self.orientation[t] as i32;
                counts[f as usize] += 1;
            }
        }
        (signs, counts)
    }

    /// Every `(dim-1)`-simplex borders exactly two top simplices with opposite
    /// induced orientations.
    pub fn is_closed_oriented_manifold(&self) -> bool {
        if self.dim == 0 {
            return false;
        }
        let (signs, counts) = self.codim_one_incidence();
        signs.iter().zip(&counts).all(|(&s, &c)| c == 2 && s == 0)
    }

    /// Boundary `(dim-1)`-simplices (exactly one coface) with their induced
    /// orientation sign. Interior faces must pair with opposite orientations.
    pub fn oriented_boundary(&self) -> Result<Vec<(usize, i8)>> {
        let (signs, counts) = self.codim_one_incidence();
        let mut out = Vec::new();
        for (f, (&s, &c)) in signs.iter().zip(&counts).enumerate() {
            match c {
                1 => out.push((f, s as i8)),
                2 if s == 0 => {}
                _ => {
                    return Err(HopfError::InvalidMesh(format!(
                        "face {f} has {c} cofaces with orientation sum {s}"
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Largest edge length.
    pub fn mesh_size(&self) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        self.simplices(1)
            .iter()
            .map(|e| distance(self.vertex(e[0] as usize), self.vertex(e[1] as usize)))
            .fold(0.0, f64::max)
    }

    /// Edge vectors `v_i - v_0` of `k`-simplex `i` as columns (`ambient x k`).
    pub fn edge_matrix(&self, k: usize, i: usize) -> DMatrix<f64> {
        let s = self.simplices(k).get(i);
        let v0 = self.vertex(s[0] as usize);
        DMatrix::from_fn(self.ambient, k, |r, c| {
            self.vertex(s[c + 1] as usize)[r] - v0[r]
        })
    }

    /// Unsigned `k`-volumes of all `k`-simplices (1 for vertices).
    pub fn volumes(&self, k: usize) -> &[f64] {
        self.volumes[k].get_or_init(|| {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            (0..self.count(k))
                .map(|i| {
                    if k == 0 {
                        return 1.0;
                    }
                    let e = self.edge_matrix(k, i);
                    let gram = e.transpose() * &e;
                    gram.determinant().max(0.0).sqrt() / fact
                })
                .collect()
        })
    }

    /// Diagonal (lumped) metric weights for `k`-cochains.
    ///
    /// Each top simplex shares its volume equally among its `k`-faces; the
    /// weight of a face is that share divided by its squared `k`-volume, so that
    /// `sum_s c_s^2 w_s` approximates the squared `L^2` norm of the form a
    /// cochain samples.
    pub fn metric_weights(&self, k: usize) -> &[f64] {
        self.weights[k].get_or_init(|| {
            let n = self.count(k);
            let mut share = vec![0.0; n];
            let faces_per_top = binomial(self.dim + 1, k + 1) as f64;
            let top_vol = self.volumes(self.dim);
            let mut buf = Vec::with_capacity(k + 1);
            for (t, s) in self.top_simplices().iter().enumerate() {
                for_each_subset(s, k + 1, &mut buf, &mut |face| {
                    let id = self.simplices(k).find(face).expect("face exists");
                    share[id] += top_vol[t] / faces_per_top;
                });
            }
            let vol = self.volumes(k);
            share
                .iter()
                .zip(vol)
                .map(|(s, v)| if *v > 0.0 { s / (v * v) } else { 0.0 })
                .collect()
        })
    }

    /// Copy of this complex with new vertex coordinates; combinatorics and
    /// orientation are kept.
    pub fn with_coordinates(&self, ambient: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != ambient * self.vertex_count() {
            return Err(HopfError::InvalidMesh("coordinate count mismatch".into()));
        }
        Ok(Self {
            dim: self.dim,
            ambient,
            coords,
            skeleta: self.skeleta.clone(),
            faces: self.faces.clone(),
            orientation: self.orientation.clone(),
            weights: (0..=self.dim).map(|_| OnceLock::new()).collect(),
            volumes: (0..=self.dim).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn to_file(&self) -> MeshFile {
        MeshFile {
            format: MESH_FORMAT.to_string(),
            version: MESH_VERSION,
            dim: self.dim,
            vertices: (0..self.vertex_count())
                .map(|v| self.vertex(v).to_vec())
                .collect(),
            top_simplices: self.top_simplices().iter().map(|s| s.to_vec()).collect(),
            orientation: self.orientation.clone(),
        }
    }

    pub fn from_file(file: &MeshFile) -> Result<Self> {
        if file.format != MESH_FORMAT || file.version != MESH_VERSION {
            return Err(HopfError::InvalidMesh(format!(
                "unsupported mesh format {} v{}",
                file.format, file.version
            )));
        }
        let ambient = file.vertices.first().map_or(0, |v| v.len());
        if file.vertices.iter().any(|v| v.len() != ambient) {
            return Err(HopfError::InvalidMesh("ragged vertex array".into()));
        }
        let coords = file.vertices.concat();
        Self::from_top_simplices(
            file.dim,
            ambient,
            coords,
            &file.top_simplices,
            Some(&file.orientation),
        )
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        self.to_file().content_hash()
    }
}

pub const MESH_FORMAT: &str = "hopfdec-mesh";
pub const MESH_VERSION: u32 = 1;

/// On-disk mesh: lower skeleta and incidence are rebuilt on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub top_simplices: Vec<Vec<u32>>,
    pub orientation: Vec<i8>,
}

impl MeshFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }

    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Visit every increasing sub-tuple of `s` with `size` entries.
pub(crate) fn for_each_subset(
    s: &[u32],
    size: usize,
    buf: &mut Vec<u32>,
    f: &mut dyn FnMut(&[u32]),
) {
    fn rec(s: &[u32], start: usize, size: usize, buf: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if buf.len() == size {
            f(buf);
            return;
        }
        for i in start..s.len() {
            if s.len() - i < size - buf.len() {
                break;
            }
            buf.push(s[i]);
            rec(s, i + 1, size, buf, f);
            buf.pop();
        }
    }
    buf.clear();
    rec(s, 0, size, buf, f);
}

fn geometric_sign(dim: usize, ambient: usize, coords: &[f64], s: &[u32]) -> Result<i8> {
    let v = |i: usize, r: usize| coords[s[i] as usize * ambient + r];
    let d = if ambient == dim {
        det(DMatrix::from_fn(dim, dim, |r, c| v(c + 1, r) - v(0, r)))
    } else if ambient == dim + 1 {
        det(DMatrix::from_fn(ambient, ambient, |r, c| v(c, r)))
    } else {
        return Err(HopfError::InvalidMesh(
            "orientation must be supplied for this ambient dimension".into(),
        ));
    };
    if d == 0.0 || !d.is_finite() {
        return Err(HopfError::InvalidMesh(format!(
            "degenerate simplex {s:?} has no orientation"
        )));
    }
    Ok(if d > 0.0 { 1 } else { -1 })
}

fn project_to_sphere(p: &mut [f64]) {
    let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
    p.iter_mut().for_each(|c| *c /= r);
}

struct MidpointCache<'a> {
    coords: &'a mut Vec<f64>,
    ambient: usize,
    index: HashMap<(u32, u32), u32>,
    spherical: bool,
}

impl MidpointCache<'_> {
    fn get(&mut self, a: u32, b: u32) -> u32 {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.index.get(&key) {
            return v;
        }
        let n = self.ambient;
        let mut p: Vec<f64> = (0..n)
            .map(|r| 0.5 * (self.coords[a as usize * n + r] + self.coords[b as usize * n + r]))
            .collect();
        if self.spherical {
            project_to_sphere(&mut p);
        }
        let id = (self.coords.len() / n) as u32;
        self.coords.extend(p);
        self.index.insert(key, id);
        id
    }
}

fn dist_ids(coords: &[f64], ambient: usize, a: u32, b: u32) -> f64 {
    distance(
        &coords[a as usize * ambient..(a as usize + 1) * ambient],
        &coords[b as usize * ambient..(b as usize + 1) * ambient],
    )
}

/// One round of edge-midpoint subdivision of a tetrahedral mesh: four corner
/// tetrahedra plus the central octahedron split along its shortest diagonal.
fn subdivide_tets(
    coords: &mut Vec<f64>,
    ambient: usize,
    tets: &[Vec<u32>],
    spherical: bool,
) -> Vec<Vec<u32>> {
    let mut cache = MidpointCache {
        coords,
        ambient,
        index: HashMap::new(),
        spherical,
    };
    let mut out = Vec::with_capacity(tets.len() * 8);
    for t in tets {
        let (a, b, c, d) = (t[0], t[1], t[2], t[3]);
        let ab = cache.get(a, b);
        let ac = cache.get(a, c);
        let ad = cache.get(a, d);
        let bc = cache.get(b, c);
        let bd = cache.get(b, d);
        let cd = cache.get(c, d);
        out.push(vec![a, ab, ac, ad]);
        out.push(vec![ab, b, bc, bd]);
        out.push(vec![ac, bc, c, cd]);
        out.push(vec![ad, bd, cd, d]);
        // equators listed in cyclic order around each diagonal
        let options = [
            (ab, cd, [ac, ad, bd, bc]),
            (ac, bd, [ab, ad, cd, bc]),
            (ad, bc, [ab, ac, cd, bd]),
        ];
        let (p, q, ring) = options
            .iter()
            .min_by(|x, y| {
                dist_ids(cache.coords, ambient, x.0, x.1).total_cmp(&dist_ids(
                    cache.coords,
                    ambient,
                    y.0,
                    y.1,
                ))
            })
            .copied()
            .expect("three diagonals");
        for i in 0..4 {
            out.push(vec![p, q, ring[i], ring[(i + 1) % 4]]);
        }
    }
    out
}

fn subdivide_triangles(
    coords: &mut Vec<f64>,
    ambient: usize,
    tris: &[Vec<u32>],
    spherical: bool,
) -> Vec<Vec<u32>> {
    let mut cache = MidpointCache {
        coords,
        ambient,
        index: HashMap::new(),
        spherical,
    };
    let mut out = Vec::with_capacity(tris.len() * 4);
    for t in tris {
        let (a, b, c) = (t[0], t[1], t[2]);
        let ab = cache.get(a, b);
        let bc = cache.get(b, c);
        let ca = cache.get(c, a);
        out.push(vec![a, ab, ca]);
        out.push(vec![ab, b, bc]);
        out.push(vec![ca, bc, c]);
        out.push(vec![ab, bc, ca]);
    }
    out
}

fn check_budget(level: usize, base: usize, factor: usize) -> Result<()> {
    let estimated = (0..level).try_fold(base, |acc, _| acc.checked_mul(factor));
    match estimated {
        Some(n) if n <= MAX_TOP_SIMPLICES => Ok(()),
        other => Err(HopfError::MeshTooLarge {
            level,
            estimated: other.unwrap_or(usize::MAX),
            budget: MAX_TOP_SIMPLICES,
        }),
    }
}

/// Triangulated unit 3-sphere: the boundary of the 16-cell refined `level`
/// times by edge-midpoint subdivision with projection back to the sphere.
pub fn build_sphere3_mesh(level: usize) -> Result<SimplicialComplex> {
    check_budget(level, 16, 8)?;
    let mut coords = Vec::with_capacity(32);
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 4];
            v[i] = s;
            coords.extend(v);
        }
    }
    let mut tets: Vec<Vec<u32>> = (0..16u32)
        .map(|bits| (0..4).map(|i| 2 * i + ((bits >> i) & 1)).collect())
        .collect();
    for _ in 0..level {
        tets = subdivide_tets(&mut coords, 4, &tets, true);
    }
    SimplicialComplex::from_top_simplices(3, 4, coords, &tets, None)
}

/// Triangulated unit 2-sphere refined from the octahedron.
pub fn build_sphere2_mesh(level: usize) -> Result<SimplicialComplex> {
    check_budget(level, 8, 4)?;
    let mut coords = Vec::with_capacity(18);
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[i] = s;
            coords.extend(v);
        }
    }
    let mut tris: Vec<Vec<u32>> = (0..8u32)
        .map(|bits| (0..3).map(|i| 2 * i + ((bits >> i) & 1)).collect())
        .collect();
    for _ in 0..level {
        tris = subdivide_triangles(&mut coords, 3, &tris, true);
    }
    SimplicialComplex::from_top_simplices(2, 3, coords, &tris, None)
}

/// Unit circle with `segments` edges.
pub fn build_circle_mesh(segments: usize) -> Result<SimplicialComplex> {
    if segments < 3 {
        return Err(HopfError::TooFewSamples {
            needed: 3,
            got: segments,
        });
    }
    let coords: Vec<f64> = (0..segments)
        .flat_map(|i| {
            let s = std::f64::consts::TAU * i as f64 / segments as f64;
            [s.cos(), s.sin()]
        })
        .collect();
    let edges: Vec<Vec<u32>> = (0..segments as u32)
        .map(|i| vec![i, (i + 1) % segments as u32])
        .collect();
    SimplicialComplex::from_top_simplices(1, 2, coords, &edges, None)
}

/// The unit square `[0,1]^2` cut into `2 m^2` triangles.
pub fn build_square_mesh(m: usize) -> Result<SimplicialComplex> {
    if m == 0 {
        return Err(HopfError::Precondition("square mesh needs m >= 1".into()));
    }
    let n = m + 1;
    let coords: Vec<f64> = (0..n * n)
        .flat_map(|k| [(k % n) as f64 / m as f64, (k / n) as f64 / m as f64])
        .collect();
    let id = |i: usize, j: usize| (j * n + i) as u32;
    let mut tris = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SimplicialComplex::from_top_simplices(2, 2, coords, &tris, None)
}

/// Layered cone over a closed 3-complex, filling the unit 4-ball.
///
/// Ring `j` (1-based) is a copy of the base scaled to radius `j / layers`; the
/// apex sits at the origin. The innermost layer is the plain cone, and each
/// prism `tet x [r_{j-1}, r_j]` is cut into four 4-simplices by the staircase
/// rule on the global vertex order, which is consistent across shared faces.
#[derive(Debug, Clone)]
pub struct ConeMesh {
    pub complex: Arc<SimplicialComplex>,
    pub base: Arc<SimplicialComplex>,
    pub layers: usize,
}

impl ConeMesh {
    pub const APEX: usize = 0;

    /// Global id of base vertex `v` on ring `j` (`1..=layers`).
    pub fn ring_vertex(&self, ring: usize, v: usize) -> usize {
        1 + (ring - 1) * self.base.vertex_count() + v
    }

    pub fn ring_radius(&self, ring: usize) -> f64 {
        ring as f64 / self.layers as f64
    }

    /// Ring whose radius is nearest to `r`, with the snapping distance.
    pub fn nearest_ring(&self, r: f64) -> (usize, f64) {
        let j = (r * self.layers as f64)
            .round()
            .clamp(1.0, self.layers as f64) as usize;
        (j, (self.ring_radius(j) - r).abs())
    }

    /// Radius of vertex `v` of the cone complex.
    pub fn vertex_ring(&self, v: usize) -> Option<usize> {
        if v == Self::APEX {
            None
        } else {
            Some(1 + (v - 1) / self.base.vertex_count())
        }
    }
}

pub fn build_cone_mesh(base: Arc<SimplicialComplex>, radial_layers: usize) -> Result<ConeMesh> {
    if radial_layers == 0 {
        return Err(HopfError::Precondition(
            "cone needs at least one radial layer".into(),
        ));
    }
    if base.dim() != 3 || !base.is_closed_oriented_manifold() {
        return Err(HopfError::InvalidMesh(
            "cone base must be a closed oriented 3-complex".into(),
        ));
    }
    let per_tet = 1 + 4 * (radial_layers - 1);
    let estimated = base.count(3).saturating_mul(per_tet);
    if estimated > MAX_TOP_SIMPLICES {
        return Err(HopfError::MeshTooLarge {
            level: radial_layers,
            estimated,
            budget: MAX_TOP_SIMPLICES,
        });
    }
    let nb = base.vertex_count();
    let ambient = base.ambient_dim();
    let mut coords = vec![0.0; ambient];
    for j in 1..=radial_layers {
        let r = j as f64 / radial_layers as f64;
        coords.extend(base.coords().iter().map(|c| c * r));
    }
    let ring = |j: usize, v: u32| (1 + (j - 1) * nb) as u32 + v;
    let mut top = Vec::with_capacity(estimated);
    for t in base.top_simplices().iter() {
        top.push(vec![
            0,
            ring(1, t[0]),
            ring(1, t[1]),
            ring(1, t[2]),
            ring(1, t[3]),
        ]);
        for j in 2..=radial_layers {
            let inner: Vec<u32> = t.iter().map(|&v| ring(j - 1, v)).collect();
            let outer: Vec<u32> = t.iter().map(|&v| ring(j, v)).collect();
            for i in 0..4 {
                let mut s: Vec<u32> = inner[i..].to_vec();
                s.extend_from_slice(&outer[..=i]);
                top.push(s);
            }
        }
    }
    let complex = SimplicialComplex::from_top_simplices(4, ambient, coords, &top, None)?;
    Ok(ConeMesh {
        complex: Arc::new(complex),
        base,
        layers: radial_layers,
    })
}
