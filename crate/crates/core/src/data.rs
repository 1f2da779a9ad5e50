//! Time series containers, synthetic generators, CSV ingestion and the
//! area-based alignment error.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A time-ordered real matrix: one row per time step, one column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: DMatrix<f64>,
    name: String,
}

impl TimeSeries {
    pub fn new(samples: DMatrix<f64>, name: impl Into<String>) -> Result<Self> {
        if samples.nrows() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 samples, got {}",
                samples.nrows()
            )));
        }
        if samples.ncols() == 0 {
            return Err(Error::InvalidSeries("need at least 1 feature".into()));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % samples.nrows(), pos / samples.nrows());
            return Err(Error::InvalidSeries(format!(
                "non-finite entry at row {}, column {}",
                r + 1,
                c + 1
            )));
        }
        Ok(Self {
            samples,
            name: name.into(),
        })
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn into_samples(self) -> DMatrix<f64> {
        self.samples
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    /// Number of features per sample.
    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }
}

/// A monotone alignment between two sequences, stored as 1-based index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlignmentPath {
    pairs: Vec<(usize, usize)>,
}

impl AlignmentPath {
    /// Validates the endpoint and step constraints. The sequence lengths are
    /// taken from the last pair.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        match pairs.first() {
            Some(&(1, 1)) => {}
            Some(&p) => return Err(Error::InvalidPath(format!("starts at {p:?}, not (1, 1)"))),
            None => return Err(Error::InvalidPath("empty path".into())),
        }
        for (k, w) in pairs.windows(2).enumerate() {
            let di = w[1].0 as isize - w[0].0 as isize;
            let dj = w[1].1 as isize - w[0].1 as isize;
            if !matches!((di, dj), (1, 0) | (0, 1) | (1, 1)) {
                return Err(Error::InvalidPath(format!(
                    "illegal step {:?} -> {:?} at position {}",
                    w[0],
                    w[1],
                    k + 2
                )));
            }
        }
        Ok(Self { pairs })
    }

    /// Validates against explicit sequence lengths as well.
    pub fn with_shape(pairs: Vec<(usize, usize)>, n: usize, m: usize) -> Result<Self> {
        let path = Self::new(pairs)?;
        if (path.n(), path.m()) != (n, m) {
            return Err(Error::InvalidPath(format!(
                "ends at ({}, {}), expected ({n}, {m})",
                path.n(),
                path.m()
            )));
        }
        Ok(path)
    }

    /// The identity alignment on two sequences of equal length.
    pub fn diagonal(n: usize) -> Self {
        Self {
            pairs: (1..=n).map(|i| (i, i)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.0)
    }

    pub fn m(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j")?;
        for &(i, j) in &self.pairs {
            writeln!(out, "{i},{j}")?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let m = read_matrix_csv(path, true)?;
        if m.ncols() != 2 {
            return Err(Error::InvalidPath(format!(
                "expected 2 columns (i,j), found {}",
                m.ncols()
            )));
        }
        let mut pairs = Vec::with_capacity(m.nrows());
        for r in 0..m.nrows() {
            let (i, j) = (m[(r, 0)], m[(r, 1)]);
            if i < 1.0 || j < 1.0 || i.fract() != 0.0 || j.fract() != 0.0 {
                return Err(Error::InvalidPath(format!(
                    "row {} holds non-index values ({i}, {j})",
                    r + 2
                )));
            }
            pairs.push((i as usize, j as usize));
        }
        Self::new(pairs)
    }
}

/// Parses a rectangular numeric CSV into a time series.
pub fn load_timeseries_csv(path: &Path, has_header: bool) -> Result<TimeSeries> {
    let samples = read_matrix_csv(path, has_header)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    TimeSeries::new(samples, name)
}

/// Reads a comma-separated numeric matrix. Line numbers in errors are
/// 1-based file lines.
pub fn read_matrix_csv(path: &Path, has_header: bool) -> Result<DMatrix<f64>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut width = None;
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                line,
                expected,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                line,
                column: c + 1,
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, width.unwrap_or(0), &values))
}

/// Writes a matrix as CSV, one row per line, with an optional header.
pub fn write_matrix_csv<W: Write>(
    m: &DMatrix<f64>,
    header: Option<&[String]>,
    mut out: W,
) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(out, "{}", h.join(","))?;
    }
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{}", m[(r, c)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticKind {
    SwissRoll,
    BrokenSwissRoll,
    TwinPeaks,
    RotatedDigit,
    DollarSign,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 5] = [
        SyntheticKind::SwissRoll,
        SyntheticKind::BrokenSwissRoll,
        SyntheticKind::TwinPeaks,
        SyntheticKind::RotatedDigit,
        SyntheticKind::DollarSign,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::SwissRoll => "swiss-roll",
            SyntheticKind::BrokenSwissRoll => "broken-swiss-roll",
            SyntheticKind::TwinPeaks => "twin-peaks",
            SyntheticKind::RotatedDigit => "rotated-digit",
            SyntheticKind::DollarSign => "dollar-sign",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// Latent-broken swiss roll leaves out this interval of the roll parameter.
pub const BROKEN_GAP: (f64, f64) = (0.4, 0.6);

/// Generator output together with the latent coordinate of every row.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub series: TimeSeries,
    /// One latent value per row (roll parameter, curve parameter, angle in
    /// degrees, or arc parameter / bar height for the dollar sign).
    pub latent: Vec<f64>,
    /// Sub-manifold label per row; all zero except for the dollar sign
    /// (0 = the S curve, 1 = the bar).
    pub label: Vec<usize>,
}

impl Synthetic {
    /// Sidecar CSV with columns `t,label`.
    pub fn write_latent_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,label")?;
        for (t, l) in self.latent.iter().zip(&self.label) {
            writeln!(out, "{t},{l}")?;
        }
        Ok(())
    }
}

pub fn gen_synthetic(kind: SyntheticKind, n: usize, noise: f64, seed: u64) -> Result<TimeSeries> {
    Ok(gen_synthetic_with_latent(kind, n, noise, seed)?.series)
}

pub fn gen_synthetic_with_latent(
    kind: SyntheticKind,
    n: usize,
    noise: f64,
    seed: u64,
) -> Result<Synthetic> {
    if n < 8 {
        return Err(Error::OutOfRange(format!("generator needs n >= 8, got {n}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::OutOfRange(format!("noise must be >= 0, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut samples, latent, label) = match kind {
        SyntheticKind::SwissRoll => {
            let u = sorted_uniform(&mut rng, n);
            (swiss_roll(&u), u, vec![0; n])
        }
        SyntheticKind::BrokenSwissRoll => {
            let (lo, hi) = BROKEN_GAP;
            let kept = 1.0 - (hi - lo);
            let mut u: Vec<f64> = (0..n)
                .map(|_| {
                    let v = rng.gen::<f64>() * kept;
                    if v < lo {
                        v
                    } else {
                        v + (hi - lo)
                    }
                })
                .collect();
            u.sort_by(f64::total_cmp);
            (swiss_roll(&u), u, vec![0; n])
        }
        SyntheticKind::TwinPeaks => {
            let u = sorted_uniform(&mut rng, n);
            let m = DMatrix::from_fn(n, 3, |r, c| {
                let a = 1.0 - 2.0 * u[r];
                let b = 0.8 * (3.0 * PI * u[r]).sin();
                match c {
                    0 => a,
                    1 => b,
                    _ => (PI * a).sin() * (3.0 * b).tanh(),
                }
            });
            (m, u, vec![0; n])
        }
        SyntheticKind::RotatedDigit => {
            let angles: Vec<f64> = (0..n).map(|k| 360.0 * k as f64 / n as f64).collect();
            let glyph = digit_glyph();
            let mut m = DMatrix::zeros(n, GLYPH_SIZE * GLYPH_SIZE);
            for (r, &deg) in angles.iter().enumerate() {
                let frame = rotate_glyph(&glyph, deg.to_radians());
                for (c, v) in frame.into_iter().enumerate() {
                    m[(r, c)] = v;
                }
            }
            (m, angles, vec![0; n])
        }
        SyntheticKind::DollarSign => dollar_sign(&mut rng, n),
    };
    if noise > 0.0 {
        let normal = Normal::new(0.0, noise).expect("finite noise");
        for v in samples.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    let series = TimeSeries::new(samples, kind.as_str())?;
    Ok(Synthetic {
        series,
        latent,
        label,
    })
}

fn sorted_uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    u
}

// The roll rises linearly with its parameter so every sample lies on a
// single 1-D curve and row order is temporal order.
fn swiss_roll(u: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(u.len(), 3, |r, c| {
        let t = 1.5 * PI * (1.0 + 2.0 * u[r]);
        match c {
            0 => t * t.cos(),
            1 => 21.0 * u[r],
            _ => t * t.sin(),
        }
    })
}

// An S made of two 3/4 arcs in the xy-plane meeting at the origin, pierced
// there by a bar along z. The two pieces span orthogonal linear subspaces.
fn dollar_sign(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, Vec<f64>, Vec<usize>) {
    let n_s = (2 * n).div_ceil(3);
    let n_bar = n - n_s;
    let s: Vec<f64> = sorted_uniform(rng, n_s).into_iter().map(|u| 2.0 * u).collect();
    let z: Vec<f64> = sorted_uniform(rng, n_bar)
        .into_iter()
        .map(|u| 2.4 * u - 1.2)
        .collect();
    let mut m = DMatrix::zeros(n, 3);
    for (r, &sv) in s.iter().enumerate() {
        let (x, y) = if sv < 1.0 {
            let th = 1.5 * PI * sv;
            (0.5 * th.cos(), 0.5 + 0.5 * th.sin())
        } else {
            let th = 0.5 * PI - 1.5 * PI * (sv - 1.0);
            (0.5 * th.cos(), -0.5 + 0.5 * th.sin())
        };
        m[(r, 0)] = x;
        m[(r, 1)] = y;
    }
    for (k, &zv) in z.iter().enumerate() {
        m[(n_s + k, 2)] = zv;
    }
    let latent = s.into_iter().chain(z).collect();
    let label = std::iter::repeat(0)
        .take(n_s)
        .chain(std::iter::repeat(1).take(n_bar))
        .collect();
    (m, latent, label)
}

pub const GLYPH_SIZE: usize = 16;

const DIGIT_FIXTURE: &str = include_str!("../assets/digit3.txt");

/// The 16x16 base glyph (a "3"), row-major, 1.0 for ink.
pub fn digit_glyph() -> Vec<f64> {
    let glyph: Vec<f64> = DIGIT_FIXTURE
        .lines()
        .filter(|l| !l.trim().is_empty())
        .flat_map(|l| l.trim().chars().map(|c| if c == '#' { 1.0 } else { 0.0 }))
        .collect();
    assert_eq!(glyph.len(), GLYPH_SIZE * GLYPH_SIZE, "digit fixture must be 16x16");
    glyph
}

/// Rotates a square glyph about its centre with bilinear resampling;
/// pixels mapped from outside the frame are 0.
pub fn rotate_glyph(glyph: &[f64], radians: f64) -> Vec<f64> {
    let size = GLYPH_SIZE;
    let c = (size as f64 - 1.0) / 2.0;
    let (sin, cos) = radians.sin_cos();
    let at = |r: isize, col: isize| -> f64 {
        if r < 0 || col < 0 || r >= size as isize || col >= size as isize {
            0.0
        } else {
            glyph[r as usize * size + col as usize]
        }
    };
    let mut out = vec![0.0; size * size];
    for r in 0..size {
        for col in 0..size {
            let (y, x) = (r as f64 - c, col as f64 - c);
            // inverse rotation: where does this output pixel come from
            let sx = cos * x + sin * y + c;
            let sy = -sin * x + cos * y + c;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as isize, y0 as isize);
            out[r * size + col] = (1.0 - fy) * ((1.0 - fx) * at(y0, x0) + fx * at(y0, x0 + 1))
                + fy * ((1.0 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
        }
    }
    out
}

/// Area between the piecewise-linear curves through two alignment paths,
/// measured in the unit square (i scaled by 1/n, j by 1/m).
pub fn alignment_error(p: &AlignmentPath, p_star: &AlignmentPath) -> Result<f64> {
    let (n, m) = (p.n(), p.m());
    if (n, m) != (p_star.n(), p_star.m()) {
        return Err(Error::DimensionMismatch(format!(
            "paths cover ({n}, {m}) and ({}, {})",
            p_star.n(),
            p_star.m()
        )));
    }
    // Rotate by 45 degrees in integer units (x = i*m, y = j*n): every legal
    // step strictly increases s = x + y, so each curve is a function
    // u(s) = y - x, and the enclosed area is half the integral of |du|.
    let curve = |path: &AlignmentPath| -> Vec<(f64, f64)> {
        path.pairs()
            .iter()
            .map(|&(i, j)| {
                let (x, y) = ((i * m) as f64, (j * n) as f64);
                (x + y, y - x)
            })
            .collect()
    };
    let a = curve(p);
    let b = curve(p_star);

    let mut breaks: Vec<f64> = a.iter().chain(&b).map(|q| q.0).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let diff = |s: f64, ia: &mut usize, ib: &mut usize| -> f64 {
        interp(&a, s, ia) - interp(&b, s, ib)
    };
    let (mut ia, mut ib) = (0, 0);
    let mut prev_s = breaks[0];
    let mut prev_d = diff(prev_s, &mut ia, &mut ib);
    let mut integral = 0.0;
    for &s in &breaks[1..] {
        let d = diff(s, &mut ia, &mut ib);
        let h = s - prev_s;
        integral += if prev_d * d >= 0.0 {
            0.5 * h * (prev_d.abs() + d.abs())
        } else {
            0.5 * h * (prev_d * prev_d + d * d) / (prev_d.abs() + d.abs())
        };
        prev_s = s;
        prev_d = d;
    }
    let scale = (n * m) as f64;
    Ok(0.5 * integral / (scale * scale))
}

// Linear interpolation on a curve with strictly increasing abscissae; the
// cursor only moves forward.
fn interp(curve: &[(f64, f64)], s: f64, cursor: &mut usize) -> f64 {
    while *cursor + 1 < curve.len() && curve[*cursor + 1].0 <= s {
        *cursor += 1;
    }
    let (s0, u0) = curve[*cursor];
    if *cursor + 1 == curve.len() || s == s0 {
        return u0;
    }
    let (s1, u1) = curve[*cursor + 1];
    u0 + (u1 - u0) * (s - s0) / (s1 - s0)
}

/// A paired synthetic alignment problem with a latent ground-truth path.
#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub x: Synthetic,
    pub y: Synthetic,
    pub truth: AlignmentPath,
}

/// Builds X and Y from two generators, maps Y through a seeded random
/// rotation and anisotropic scaling, and derives the ground-truth path by
/// aligning the latent coordinates.
#[allow(clippy::too_many_arguments)]
pub fn synthetic_pair(
    kind_x: SyntheticKind,
    kind_y: SyntheticKind,
    n: usize,
    m: usize,
    noise: f64,
    seed: u64,
) -> Result<SyntheticPair> {
    let x = gen_synthetic_with_latent(kind_x, n, noise, seed)?;
    let mut y = gen_synthetic_with_latent(kind_y, m, noise, seed.wrapping_add(0x9e37_79b9))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    let transform = random_linear_map(&mut rng, y.series.dim());
    let mapped = y.series.samples() * transform;
    y.series = TimeSeries::new(mapped, y.series.name().to_string())?;

    let lx = DMatrix::from_column_slice(n, 1, &x.latent);
    let ly = DMatrix::from_column_slice(m, 1, &y.latent);
    let (truth, _) = crate::dtw::dtw_align_with(&lx, &ly, |a, b| (a[0] - b[0]).abs())?;
    Ok(SyntheticPair { x, y, truth })
}

// Rotation (QR of a Gaussian matrix) followed by per-axis scaling in [0.5, 2].
fn random_linear_map(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let g = DMatrix::from_fn(d, d, |_, _| normal.sample(rng));
    let q = g.qr().q();
    let scales = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
        0.5 * 4f64.powf(rng.gen::<f64>())
    }));
    q * scales
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(name: &str, body: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("wowarp-data-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_single_column() {
        let p = write_tmp("three.csv", "0\n1\n2\n");
        let ts = load_timeseries_csv(&p, false).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.dim(), 1);
        assert_eq!(ts.samples()[(2, 0)], 2.0);
    }

    #[test]
    fn ragged_row_names_line() {
        let p = write_tmp("ragged.csv", "1,2,3\n1,2,3,4\n");
        match load_timeseries_csv(&p, false) {
            Err(Error::RaggedRow { line, expected, found }) => {
                assert_eq!((line, expected, found), (2, 3, 4));
            }
            other => panic!("expected ragged row error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_names_cell() {
        let p = write_tmp("bad.csv", "a,b\n1,2\n3,x\n");
        match load_timeseries_csv(&p, true) {
            Err(Error::NonNumeric { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("expected non-numeric error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_timeseries_csv(Path::new("/nonexistent/x.csv"), false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn har_fixture_has_six_features() {
        let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/har_walk.csv");
        let ts = load_timeseries_csv(&p, true).unwrap();
        assert_eq!(ts.dim(), 6);
        assert_eq!(ts.len(), 8);
        // first and last rows, transcribed from the fixture
        assert_eq!(ts.samples()[(0, 0)], 1.0213);
        assert_eq!(ts.samples()[(0, 5)], -0.0421);
        assert_eq!(ts.samples()[(7, 3)], 0.1377);
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in SyntheticKind::ALL {
            let a = gen_synthetic(kind, 100, 0.05, 7).unwrap();
            let b = gen_synthetic(kind, 100, 0.05, 7).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(matches!(
            "moebius".parse::<SyntheticKind>(),
            Err(Error::UnknownKind(_))
        ));
    }

    #[test]
    fn small_n_rejected() {
        assert!(gen_synthetic(SyntheticKind::SwissRoll, 7, 0.0, 0).is_err());
    }

    #[test]
    fn rotated_digit_frames_follow_angle_grid() {
        let s = gen_synthetic_with_latent(SyntheticKind::RotatedDigit, 72, 0.0, 0).unwrap();
        assert_eq!(s.series.len(), 72);
        assert_eq!(s.series.dim(), 256);
        for (k, a) in s.latent.iter().enumerate() {
            assert!((a - 5.0 * k as f64).abs() < 1e-12);
        }
        // frame 0 is the unrotated glyph
        let glyph = digit_glyph();
        for (c, g) in glyph.iter().enumerate() {
            assert!((s.series.samples()[(0, c)] - g).abs() < 1e-12);
        }
        // a half turn maps pixel (r, c) to (15 - r, 15 - c)
        let half = rotate_glyph(&glyph, PI);
        for r in 0..16 {
            for c in 0..16 {
                assert!((half[r * 16 + c] - glyph[(15 - r) * 16 + (15 - c)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn broken_roll_has_single_latent_gap() {
        let s = gen_synthetic_with_latent(SyntheticKind::BrokenSwissRoll, 100, 0.0, 7).unwrap();
        let mut gaps: Vec<f64> = s.latent.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        let largest = gaps[gaps.len() - 1];
        let second = gaps[gaps.len() - 2];
        assert!(largest >= BROKEN_GAP.1 - BROKEN_GAP.0);
        assert!(second < 0.5 * (BROKEN_GAP.1 - BROKEN_GAP.0), "second gap {second}");
        assert!(s.latent.iter().all(|u| *u < BROKEN_GAP.0 || *u >= BROKEN_GAP.1));
    }

    #[test]
    fn dollar_sign_labels_split_subspaces() {
        let s = gen_synthetic_with_latent(SyntheticKind::DollarSign, 90, 0.0, 3).unwrap();
        let x = s.series.samples();
        for (r, &l) in s.label.iter().enumerate() {
            if l == 0 {
                assert_eq!(x[(r, 2)], 0.0);
            } else {
                assert_eq!((x[(r, 0)], x[(r, 1)]), (0.0, 0.0));
            }
        }
        assert_eq!(s.label.iter().filter(|&&l| l == 1).count(), 30);
    }

    #[test]
    fn error_zero_for_identical_paths() {
        let p = AlignmentPath::new(vec![(1, 1), (2, 1), (2, 2), (3, 3)]).unwrap();
        assert_eq!(alignment_error(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn error_single_cell_detour() {
        // up-then-right against the diagonal of a 2x2 grid: the triangle
        // between them has legs 1/2 in unit-square coordinates.
        let p = AlignmentPath::new(vec![(1, 1), (1, 2), (2, 2)]).unwrap();
        let d = AlignmentPath::diagonal(2);
        let e = alignment_error(&p, &d).unwrap();
        assert!((e - 0.125).abs() < 1e-15, "{e}");
    }

    #[test]
    fn error_rejects_mismatched_shapes() {
        let a = AlignmentPath::diagonal(3);
        let b = AlignmentPath::diagonal(4);
        assert!(alignment_error(&a, &b).is_err());
    }

    #[test]
    fn path_validation() {
        assert!(AlignmentPath::new(vec![(1, 2), (2, 2)]).is_err());
        assert!(AlignmentPath::new(vec![(1, 1), (3, 2)]).is_err());
        assert!(AlignmentPath::new(vec![(1, 1), (2, 2), (2, 2)]).is_err());
        assert!(AlignmentPath::with_shape(vec![(1, 1), (2, 2)], 2, 3).is_err());
    }
}
