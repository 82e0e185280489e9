//! Bit-exact on-disk formats.
//!
//! Frame files (`F4DG`) hold one grid field as little-endian f64 triples in
//! row-major (u-major) order behind a fixed header; sequences are a
//! directory of frame files plus a `manifest.json`. Diffeos (`F4DD`), time
//! warps (`F4DW`), and PCA models (`F4DM`) use the same container style
//! with an additional header checksum, so any single corrupted header byte
//! is rejected either by a field check, by the exact-length check, or by
//! the checksum. Mesh interop goes through grid-sampled OBJ files.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diffeo::SphereDiffeo;
use crate::error::{F4dError, Result};
use crate::field::Field3;
use crate::grid::SphericalGrid;
use crate::srnf::Srnf;
use crate::stats::PcaModel;
use crate::surface::Surface;
use crate::trajectory::{SurfaceSequence, TimeWarp, Trajectory, Tsrvf};

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC_FRAME: [u8; 4] = *b"F4DG";
const MAGIC_DIFFEO: [u8; 4] = *b"F4DD";
const MAGIC_WARP: [u8; 4] = *b"F4DW";
const MAGIC_MODEL: [u8; 4] = *b"F4DM";

// ---------------------------------------------------------------- helpers

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(magic: [u8; 4]) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(&magic);
        Self { buf }
    }

    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn f64s(&mut self, xs: &[f64]) {
        for x in xs {
            self.buf.extend_from_slice(&x.to_le_bytes());
        }
    }

    fn vec3s(&mut self, xs: &[[f64; 3]]) {
        for p in xs {
            for x in p {
                self.buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }

    /// FNV-1a over everything written so far (the header), appended as u32.
    fn checksum(&mut self) {
        let mut h: u32 = 0x811c_9dc5;
        for b in &self.buf {
            h ^= *b as u32;
            h = h.wrapping_mul(0x0100_0193);
        }
        self.u32(h);
    }

    fn finish(self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.buf)?;
        Ok(())
    }
}

struct Reader {
    buf: Vec<u8>,
    pos: usize,
    path: PathBuf,
}

impl Reader {
    fn open(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)?.read_to_end(&mut buf)?;
        Ok(Self {
            buf,
            pos: 0,
            path: path.to_path_buf(),
        })
    }

    fn truncated(&self, detail: &str) -> F4dError {
        F4dError::TruncatedFile {
            path: self.path.clone(),
            detail: detail.to_string(),
        }
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<()> {
        if self.buf.len() < self.pos + 4 || self.buf[self.pos..self.pos + 4] != expected {
            return Err(F4dError::BadMagic {
                path: self.path.clone(),
                expected,
            });
        }
        self.pos += 4;
        Ok(())
    }

    fn u32(&mut self) -> Result<u32> {
        if self.buf.len() < self.pos + 4 {
            return Err(self.truncated("header ends early"));
        }
        let mut b = [0u8; 4];
        b.copy_from_slice(&self.buf[self.pos..self.pos + 4]);
        self.pos += 4;
        Ok(u32::from_le_bytes(b))
    }

    fn version(&mut self) -> Result<()> {
        let found = self.u32()?;
        if found != SCHEMA_VERSION {
            return Err(F4dError::VersionMismatch {
                path: self.path.clone(),
                found,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(())
    }

    /// Verifies the FNV-1a checksum of all bytes before the current offset.
    fn checksum(&mut self) -> Result<()> {
        let mut h: u32 = 0x811c_9dc5;
        for b in &self.buf[..self.pos] {
            h ^= *b as u32;
            h = h.wrapping_mul(0x0100_0193);
        }
        let stored = self.u32()?;
        if stored != h {
            return Err(F4dError::HeaderChecksum {
                path: self.path.clone(),
            });
        }
        Ok(())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        if self.buf.len() < self.pos + 8 * n {
            return Err(self.truncated("payload shorter than header promises"));
        }
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut b = [0u8; 8];
            b.copy_from_slice(&self.buf[self.pos + 8 * k..self.pos + 8 * k + 8]);
            out.push(f64::from_le_bytes(b));
        }
        self.pos += 8 * n;
        Ok(out)
    }

    fn vec3s(&mut self, n: usize) -> Result<Vec<[f64; 3]>> {
        let flat = self.f64s(3 * n)?;
        Ok(flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.truncated("trailing bytes after payload"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- frames

/// Writes one grid field: magic `F4DG`, header
/// `(u32 schema_version, u32 nu, u32 nv, u32 channels = 3)`, then
/// `nu * nv * 3` little-endian f64 in row-major (u-major) order.
pub fn write_frame(path: &Path, field: &Field3) -> Result<()> {
    let g = field.grid();
    let mut w = Writer::new(MAGIC_FRAME);
    w.u32(SCHEMA_VERSION);
    w.u32(g.nu() as u32);
    w.u32(g.nv() as u32);
    w.u32(3);
    w.vec3s(field.data());
    w.finish(path)
}

pub fn read_frame(path: &Path) -> Result<Field3> {
    read_frame_on(path, None)
}

fn read_frame_on(path: &Path, grid: Option<&Arc<SphericalGrid>>) -> Result<Field3> {
    let mut r = Reader::open(path)?;
    r.magic(MAGIC_FRAME)?;
    r.version()?;
    let nu = r.u32()? as usize;
    let nv = r.u32()? as usize;
    let channels = r.u32()?;
    if channels != 3 {
        return Err(r.truncated(&format!("unsupported channel count {channels}")));
    }
    let g = match grid {
        Some(g) => {
            if g.nu() != nu || g.nv() != nv {
                return Err(F4dError::GridMismatchAcrossFrames {
                    path: path.to_path_buf(),
                });
            }
            g.clone()
        }
        None => SphericalGrid::new(nu, nv)?,
    };
    let data = r.vec3s(nu * nv)?;
    r.expect_end()?;
    Ok(Field3::from_data(g, data))
}

// ---------------------------------------------------------------- sequences

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
}

/// Manifest of a sequence directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub frames: usize,
    pub times: Vec<f64>,
    pub frame_files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gt_warp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gt_diffeo: Option<String>,
}

fn manifest_err(path: &Path, detail: impl Into<String>) -> F4dError {
    F4dError::BadManifest {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

/// Writes a sequence directory: one `F4DG` file per frame plus
/// `manifest.json`.
pub fn write_sequence(seq: &SurfaceSequence, dir: &Path) -> Result<()> {
    write_field_sequence(
        dir,
        &seq.times,
        seq.frames.iter().map(|f| f.field()),
        None,
    )
}

pub fn write_field_sequence<'a>(
    dir: &Path,
    times: &[f64],
    frames: impl ExactSizeIterator<Item = &'a Field3>,
    notes: Option<&str>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = frames.len();
    let mut frame_files = Vec::with_capacity(n);
    let mut grid_spec = None;
    for (k, f) in frames.enumerate() {
        let name = format!("frame_{k:04}.f4dg");
        write_frame(&dir.join(&name), f)?;
        grid_spec = Some(GridSpec {
            nu: f.grid().nu(),
            nv: f.grid().nv(),
        });
        frame_files.push(name);
    }
    let manifest = SequenceManifest {
        schema_version: SCHEMA_VERSION,
        grid: grid_spec.expect("at least one frame"),
        frames: n,
        times: times.to_vec(),
        frame_files,
        notes: notes.map(str::to_string),
        gt_warp: None,
        gt_diffeo: None,
    };
    write_manifest(&manifest, dir)
}

pub fn write_manifest(manifest: &SequenceManifest, dir: &Path) -> Result<()> {
    let mut f = fs::File::create(dir.join("manifest.json"))?;
    f.write_all(serde_json::to_string_pretty(manifest)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<SequenceManifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path)?;
    let manifest: SequenceManifest = serde_json::from_str(&text)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(F4dError::VersionMismatch {
            path,
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    if manifest.frames != manifest.frame_files.len() || manifest.frames != manifest.times.len() {
        return Err(F4dError::TruncatedFile {
            path,
            detail: format!(
                "manifest promises {} frames but lists {} files and {} times",
                manifest.frames,
                manifest.frame_files.len(),
                manifest.times.len()
            ),
        });
    }
    for w in manifest.times.windows(2) {
        if w[1] <= w[0] {
            return Err(manifest_err(&path, "times not strictly increasing"));
        }
    }
    if let (Some(first), Some(last)) = (manifest.times.first(), manifest.times.last()) {
        if *first < 0.0 || *last > 1.0 {
            return Err(manifest_err(&path, "times must lie in [0, 1]"));
        }
    }
    Ok(manifest)
}

pub fn read_field_sequence(dir: &Path) -> Result<(SequenceManifest, Vec<Field3>)> {
    let manifest = read_manifest(dir)?;
    let grid = SphericalGrid::new(manifest.grid.nu, manifest.grid.nv)?;
    let mut frames = Vec::with_capacity(manifest.frames);
    for name in &manifest.frame_files {
        let p = dir.join(name);
        if !p.exists() {
            return Err(F4dError::TruncatedFile {
                path: p,
                detail: "frame file listed in manifest is missing".into(),
            });
        }
        frames.push(read_frame_on(&p, Some(&grid))?);
    }
    Ok((manifest, frames))
}

pub fn read_sequence(dir: &Path) -> Result<SurfaceSequence> {
    let (manifest, frames) = read_field_sequence(dir)?;
    SurfaceSequence::new(manifest.times, frames.into_iter().map(Surface::new).collect())
}

/// Reads a sequence directory whose frames are SRNF fields.
pub fn read_srnf_sequence(dir: &Path) -> Result<Trajectory> {
    let (manifest, frames) = read_field_sequence(dir)?;
    Trajectory::new(manifest.times, frames.into_iter().map(Srnf::new).collect())
}

// ---------------------------------------------------------------- diffeo

/// `F4DD`: header `(version, nu, nv, coeff_count, checksum)` then the
/// target coordinate grids, the Jacobian determinant grid, and optional
/// basis coefficients. Writing refuses folded maps.
pub fn write_diffeo(path: &Path, gamma: &SphereDiffeo) -> Result<()> {
    gamma.require_valid()?;
    let g = gamma.grid();
    let n_coeffs = gamma.coeffs().map_or(0, <[f64]>::len);
    let mut w = Writer::new(MAGIC_DIFFEO);
    w.u32(SCHEMA_VERSION);
    w.u32(g.nu() as u32);
    w.u32(g.nv() as u32);
    w.u32(n_coeffs as u32);
    w.checksum();
    w.f64s(gamma.target_u());
    w.f64s(gamma.target_v());
    w.f64s(gamma.jac_det());
    if let Some(c) = gamma.coeffs() {
        w.f64s(c);
    }
    w.finish(path)
}

pub fn read_diffeo(path: &Path) -> Result<SphereDiffeo> {
    let mut r = Reader::open(path)?;
    r.magic(MAGIC_DIFFEO)?;
    r.version()?;
    let nu = r.u32()? as usize;
    let nv = r.u32()? as usize;
    let n_coeffs = r.u32()? as usize;
    r.checksum()?;
    let grid = SphericalGrid::new(nu, nv)?;
    let target_u = r.f64s(grid.len())?;
    let target_v = r.f64s(grid.len())?;
    let jac = r.f64s(grid.len())?;
    let coeffs = if n_coeffs > 0 {
        Some(r.f64s(n_coeffs)?)
    } else {
        None
    };
    r.expect_end()?;
    let gamma = SphereDiffeo::from_raw_parts(grid, target_u, target_v, jac, coeffs);
    gamma.require_valid()?;
    Ok(gamma)
}

// ---------------------------------------------------------------- warp

/// `F4DW`: header `(version, T, checksum)` then the warp samples.
pub fn write_warp(path: &Path, warp: &TimeWarp) -> Result<()> {
    let mut w = Writer::new(MAGIC_WARP);
    w.u32(SCHEMA_VERSION);
    w.u32(warp.len() as u32);
    w.checksum();
    w.f64s(warp.samples());
    w.finish(path)
}

pub fn read_warp(path: &Path) -> Result<TimeWarp> {
    let mut r = Reader::open(path)?;
    r.magic(MAGIC_WARP)?;
    r.version()?;
    let t = r.u32()? as usize;
    r.checksum()?;
    if t < 2 {
        return Err(r.truncated("warp needs at least two samples"));
    }
    let samples = r.f64s(t)?;
    r.expect_end()?;
    TimeWarp::new(samples)
}

// ---------------------------------------------------------------- model

/// `F4DM`: header `(version, nu, nv, T, k, n, checksum)` then times,
/// flattening weights, the mean, eigenvalues, and eigenvectors.
pub fn write_model(path: &Path, model: &PcaModel) -> Result<()> {
    let g = model.mean.grid();
    let t = model.mean.len();
    let mut w = Writer::new(MAGIC_MODEL);
    w.u32(SCHEMA_VERSION);
    w.u32(g.nu() as u32);
    w.u32(g.nv() as u32);
    w.u32(t as u32);
    w.u32(model.k as u32);
    w.u32(model.sample_size as u32);
    w.checksum();
    w.f64s(model.mean.times());
    w.f64s(&crate::stats::model_flatten_weights(model));
    for frame in model.mean.values() {
        w.vec3s(frame.data());
    }
    w.f64s(&model.eigenvalues);
    for e in &model.eigenvectors {
        for frame in e.values() {
            w.vec3s(frame.data());
        }
    }
    w.finish(path)
}

pub fn read_model(path: &Path) -> Result<PcaModel> {
    let mut r = Reader::open(path)?;
    r.magic(MAGIC_MODEL)?;
    r.version()?;
    let nu = r.u32()? as usize;
    let nv = r.u32()? as usize;
    let t = r.u32()? as usize;
    let k = r.u32()? as usize;
    let n = r.u32()? as usize;
    r.checksum()?;
    if t < 2 {
        return Err(r.truncated("model time axis needs at least two samples"));
    }
    if k + 1 > n {
        return Err(r.truncated("model keeps more components than its sample size allows"));
    }
    let grid = SphericalGrid::new(nu, nv)?;
    let times = r.f64s(t)?;
    let _weights = r.f64s(t)?; // derivable; stored for interoperability
    let read_tsrvf = |r: &mut Reader| -> Result<Tsrvf> {
        let mut values = Vec::with_capacity(t);
        for _ in 0..t {
            values.push(Field3::from_data(grid.clone(), r.vec3s(grid.len())?));
        }
        Ok(Tsrvf::new(times.clone(), values))
    };
    let mean = read_tsrvf(&mut r)?;
    let eigenvalues = r.f64s(k)?;
    let mut eigenvectors = Vec::with_capacity(k);
    for _ in 0..k {
        eigenvectors.push(read_tsrvf(&mut r)?);
    }
    r.expect_end()?;
    Ok(PcaModel {
        mean,
        eigenvalues,
        eigenvectors,
        k,
        sample_size: n,
        truncated: false,
    })
}

// ---------------------------------------------------------------- OBJ

/// Triangulated OBJ of the grid: `nu * nv` grid vertices in row-major
/// order, two pole-cap vertices, quads split into triangles with the
/// v-seam welded (faces wrap to column 0) and fans closing the poles.
pub fn export_mesh(f: &Surface, path: &Path) -> Result<()> {
    let g = f.grid();
    let (nu, nv) = (g.nu(), g.nv());
    let mut out = String::new();
    out.push_str(&format!("# grid surface {nu} {nv}\n"));
    for p in f.field().data() {
        out.push_str(&format!("v {} {} {}\n", p[0], p[1], p[2]));
    }
    // pole caps: mean of the nearest row
    let mut north = [0.0; 3];
    let mut south = [0.0; 3];
    for j in 0..nv {
        let a = f.field().at(0, j);
        let b = f.field().at(nu - 1, j);
        for c in 0..3 {
            north[c] += a[c] / nv as f64;
            south[c] += b[c] / nv as f64;
        }
    }
    out.push_str(&format!("v {} {} {}\n", north[0], north[1], north[2]));
    out.push_str(&format!("v {} {} {}\n", south[0], south[1], south[2]));

    let vid = |i: usize, j: usize| i * nv + (j % nv) + 1;
    let north_id = nu * nv + 1;
    let south_id = nu * nv + 2;
    for j in 0..nv {
        out.push_str(&format!("f {} {} {}\n", north_id, vid(0, j + 1), vid(0, j)));
    }
    for i in 0..nu - 1 {
        for j in 0..nv {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            out.push_str(&format!("f {a} {b} {c}\n"));
            out.push_str(&format!("f {a} {c} {d}\n"));
        }
    }
    for j in 0..nv {
        out.push_str(&format!(
            "f {} {} {}\n",
            south_id,
            vid(nu - 1, j),
            vid(nu - 1, j + 1)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Inverts [`export_mesh`]: accepts only meshes whose vertices are exactly
/// a grid sampling in export order (grid points then two pole caps).
pub fn import_grid_mesh(path: &Path, nu: usize, nv: usize) -> Result<Surface> {
    let not_grid = |detail: &str| F4dError::NotAGridMesh {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let text = fs::read_to_string(path)?;
    let mut verts: Vec<[f64; 3]> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("v ") {
            let mut it = rest.split_whitespace();
            let mut p = [0.0; 3];
            for c in &mut p {
                *c = it
                    .next()
                    .ok_or_else(|| not_grid("vertex with fewer than 3 coordinates"))?
                    .parse::<f64>()
                    .map_err(|_| not_grid("unparseable vertex coordinate"))?;
            }
            verts.push(p);
        }
    }
    if verts.len() != nu * nv + 2 {
        return Err(not_grid(&format!(
            "expected {} grid vertices plus 2 pole caps, found {}",
            nu * nv,
            verts.len()
        )));
    }
    let grid = SphericalGrid::new(nu, nv)?;
    verts.truncate(nu * nv);
    Ok(Surface::new(Field3::from_data(grid, verts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use tempfile::tempdir;

    fn grid() -> Arc<SphericalGrid> {
        SphericalGrid::new(8, 8).unwrap()
    }

    #[test]
    fn frame_roundtrip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("a.f4dg");
        let f = synth::random_smooth_surface(grid(), 3).into_field();
        write_frame(&p, &f).unwrap();
        let back = read_frame(&p).unwrap();
        assert_eq!(f.data(), back.data());
    }

    #[test]
    fn corrupt_magic_is_named() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("bad.f4dg");
        let f = synth::random_smooth_surface(grid(), 3).into_field();
        write_frame(&p, &f).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes[0] ^= 0xff;
        fs::write(&p, &bytes).unwrap();
        match read_frame(&p) {
            Err(F4dError::BadMagic { path, .. }) => assert_eq!(path, p),
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn manifest_frame_count_mismatch_is_truncation() {
        let dir = tempdir().unwrap();
        let g = grid();
        let frames: Vec<Surface> = (0..3).map(|s| synth::random_smooth_surface(g.clone(), s)).collect();
        let seq = SurfaceSequence::uniform(frames).unwrap();
        write_sequence(&seq, dir.path()).unwrap();
        fs::remove_file(dir.path().join("frame_0002.f4dg")).unwrap();
        assert!(matches!(
            read_sequence(dir.path()),
            Err(F4dError::TruncatedFile { .. })
        ));
    }

    #[test]
    fn sequence_roundtrip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let g = grid();
        let frames: Vec<Surface> = (0..4).map(|s| synth::random_smooth_surface(g.clone(), s)).collect();
        let seq = SurfaceSequence::uniform(frames).unwrap();
        write_sequence(&seq, dir.path()).unwrap();
        let back = read_sequence(dir.path()).unwrap();
        assert_eq!(back.times, seq.times);
        for (a, b) in seq.frames.iter().zip(&back.frames) {
            assert_eq!(a.field().data(), b.field().data());
        }
    }

    #[test]
    fn diffeo_roundtrip_and_validity_guard() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("g.f4dd");
        let g = grid();
        let basis = crate::harmonics::make_tangent_basis(&g, 2);
        let gamma = synth::random_sphere_diffeo(&basis, 5, 0.05).unwrap();
        write_diffeo(&p, &gamma).unwrap();
        let back = read_diffeo(&p).unwrap();
        assert_eq!(gamma.target_u(), back.target_u());
        assert_eq!(gamma.target_v(), back.target_v());
        assert_eq!(gamma.jac_det(), back.jac_det());
        assert_eq!(gamma.coeffs(), back.coeffs());

        // writer refuses a folded map
        let bad = SphereDiffeo::from_raw_parts(
            g.clone(),
            gamma.target_u().to_vec(),
            gamma.target_v().to_vec(),
            vec![-1.0; g.len()],
            None,
        );
        assert!(matches!(
            write_diffeo(&dir.path().join("bad.f4dd"), &bad),
            Err(F4dError::InvalidDiffeo { .. })
        ));
    }

    #[test]
    fn warp_roundtrip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("w.f4dw");
        let xi = synth::random_time_warp(11, 0.4, 33);
        write_warp(&p, &xi).unwrap();
        let back = read_warp(&p).unwrap();
        assert_eq!(xi.samples(), back.samples());
    }

    #[test]
    fn obj_roundtrip_is_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.obj");
        let g = SphericalGrid::new(16, 16).unwrap();
        let f = synth::sphere(g, 1.0);
        export_mesh(&f, &p).unwrap();
        let back = import_grid_mesh(&p, 16, 16).unwrap();
        for (a, b) in f.field().data().iter().zip(back.field().data()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn arbitrary_mesh_is_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("tri.obj");
        fs::write(&p, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert!(matches!(
            import_grid_mesh(&p, 8, 8),
            Err(F4dError::NotAGridMesh { .. })
        ));
    }
}
