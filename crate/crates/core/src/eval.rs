//! Monte Carlo estimation of logical error rates and threshold crossings.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{LogicalClass, RotatedPlanarCode};
use crate::decoder::Decoder;
use crate::error::{invalid, Error, Result};
use crate::noise::{sample_error, trial_rng, NoiseModel};

pub const CSV_HEADER: &str = "decoder,d,eta,p,trials,failures,p_l,ci_low,ci_high,seed,wall_time_s";

/// Run until `target_failures` failures or `max_trials` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub target_failures: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            target_failures: 100,
            max_trials: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub syndrome_matched: bool,
    /// Logical class of the residual, read off the logical operators even
    /// when the syndrome did not match.
    pub residual_class: LogicalClass,
    pub decode_time: Duration,
}

/// Sample, decode and classify trial `trial` of the stream `master_seed`.
pub fn run_trial<D: Decoder + ?Sized>(
    code: &RotatedPlanarCode,
    noise: &NoiseModel,
    decoder: &D,
    master_seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let sampled = sample_error(noise, &mut trial_rng(master_seed, trial));
    let syndrome = code.syndrome(&sampled.pauli)?;
    let erased = noise.has_erasures().then_some(&sampled.erased);
    let start = Instant::now();
    let correction = decoder.decode(&syndrome, erased)?;
    let decode_time = start.elapsed();
    let residual = sampled.pauli.multiply(&correction)?;
    let syndrome_matched = code.syndrome(&residual)?.is_trivial();
    let residual_class = code.logical_class_unchecked(&residual);
    Ok(TrialOutcome {
        success: syndrome_matched && residual_class == LogicalClass::I,
        syndrome_matched,
        residual_class,
        decode_time,
    })
}

/// One row of results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub decoder: String,
    pub d: usize,
    pub eta: f64,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl CurvePoint {
    pub fn new(decoder: &str, d: usize, eta: f64, p: f64, trials: u64, failures: u64, seed: u64, wall_time_s: f64) -> Self {
        let p_l = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
        let (ci_low, ci_high) = confidence_interval(failures, trials);
        Self {
            decoder: decoder.to_string(),
            d,
            eta,
            p,
            trials,
            failures,
            p_l,
            ci_low,
            ci_high,
            seed,
            wall_time_s,
        }
    }

    /// No failure was seen, so `p_l` is zero and `ci_high` is an upper bound.
    pub fn is_upper_bound(&self) -> bool {
        self.failures == 0
    }
}

/// `(0.8 P_L, 1.25 P_L)` at 100 or more failures. Below that the factors are
/// widened to `0.8^k, 1.25^k` with `k = sqrt(100 / failures)`, following the
/// 1/sqrt(f) growth of the relative error. Zero failures give `(0, 3 / N)`.
pub fn confidence_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    if failures == 0 {
        return (0.0, (3.0 / trials as f64).min(1.0));
    }
    let p_l = failures as f64 / trials as f64;
    if failures >= 100 {
        return (0.8 * p_l, 1.25 * p_l);
    }
    let k = (100.0 / failures as f64).sqrt();
    (0.8f64.powf(k) * p_l, (1.25f64.powf(k) * p_l).min(1.0))
}

/// Identifies the point being estimated; copied into the result row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLabel {
    pub decoder: String,
    pub eta: f64,
    pub p: f64,
}

const FIRST_BATCH: u64 = 64;
const MAX_BATCH: u64 = 8192;

/// Estimate P_L for one (code, noise, decoder).
///
/// Trials run in parallel batches but are counted in index order, and the
/// run stops at the trial that reaches the failure target, so the result
/// depends only on `master_seed`.
pub fn run_point<D: Decoder + ?Sized>(
    code: &RotatedPlanarCode,
    noise: &NoiseModel,
    decoder: &D,
    label: &PointLabel,
    stop: &StopRule,
    master_seed: u64,
) -> Result<CurvePoint> {
    if stop.target_failures == 0 {
        return Err(invalid("target failures must be at least 1"));
    }
    let start = Instant::now();
    let (mut trials, mut failures) = (0u64, 0u64);
    let mut batch = FIRST_BATCH;
    'outer: while trials < stop.max_trials {
        let end = (trials + batch).min(stop.max_trials);
        let outcomes: Vec<bool> = (trials..end)
            .into_par_iter()
            .map(|t| run_trial(code, noise, decoder, master_seed, t).map(|o| o.success))
            .collect::<Result<_>>()?;
        for ok in outcomes {
            trials += 1;
            if !ok {
                failures += 1;
                if failures >= stop.target_failures {
                    break 'outer;
                }
            }
        }
        batch = (batch * 2).min(MAX_BATCH);
    }
    Ok(CurvePoint::new(
        &label.decoder,
        code.d(),
        label.eta,
        label.p,
        trials,
        failures,
        master_seed,
        start.elapsed().as_secs_f64(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCrossing {
    pub d1: usize,
    pub d2: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    /// Mean of the per-pair crossings.
    pub p_th: f64,
    /// Half the range of the per-pair crossings.
    pub spread: f64,
    pub crossings: Vec<PairCrossing>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdResult {
    Found(ThresholdEstimate),
    NoThreshold,
}

/// Where the larger code stops beating the smaller one.
///
/// Inputs are `(p, P_L)` curves. Only grid points present in both curves
/// with nonzero P_L are used. Each sign change of `ln P_L(large) - ln
/// P_L(small)` from negative to positive is located by linear interpolation
/// in `p`; with several (noisy) changes the median is returned.
pub fn pair_crossing(small: &[(f64, f64)], large: &[(f64, f64)]) -> Option<f64> {
    let mut diffs: Vec<(f64, f64)> = small
        .iter()
        .filter(|(_, a)| *a > 0.0)
        .filter_map(|&(p, a)| {
            large
                .iter()
                .find(|(q, b)| (q - p).abs() <= 1e-12 * p.abs().max(1.0) && *b > 0.0)
                .map(|&(_, b)| (p, b.ln() - a.ln()))
        })
        .collect();
    diffs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut crossings: Vec<f64> = diffs
        .windows(2)
        .filter(|w| w[0].1 <= 0.0 && w[1].1 > 0.0)
        .map(|w| {
            let ((p0, g0), (p1, g1)) = (w[0], w[1]);
            p0 + (p1 - p0) * (-g0) / (g1 - g0)
        })
        .collect();
    if crossings.is_empty() {
        return None;
    }
    crossings.sort_by(f64::total_cmp);
    let m = crossings.len();
    Some(if m % 2 == 1 {
        crossings[m / 2]
    } else {
        0.5 * (crossings[m / 2 - 1] + crossings[m / 2])
    })
}

/// Crossings of adjacent distances, combined into one estimate.
pub fn estimate_threshold(points: &[CurvePoint]) -> Result<ThresholdResult> {
    let mut ds: Vec<usize> = points.iter().map(|p| p.d).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 2 {
        return Err(invalid("threshold estimation needs at least two distances"));
    }
    let curve = |d: usize| -> Vec<(f64, f64)> { points.iter().filter(|p| p.d == d).map(|p| (p.p, p.p_l)).collect() };
    let crossings: Vec<PairCrossing> = ds
        .windows(2)
        .filter_map(|w| pair_crossing(&curve(w[0]), &curve(w[1])).map(|p| PairCrossing { d1: w[0], d2: w[1], p }))
        .collect();
    if crossings.is_empty() {
        return Ok(ThresholdResult::NoThreshold);
    }
    let ps: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    let p_th = ps.iter().sum::<f64>() / ps.len() as f64;
    let (lo, hi) = ps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &p| (l.min(p), h.max(p)));
    Ok(ThresholdResult::Found(ThresholdEstimate {
        p_th,
        spread: (hi - lo) / 2.0,
        crossings,
    }))
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{kind:?}"),
        },
    }
}

/// Appends rows to a results file, writing the header only into an empty
/// file. Each row is flushed as soon as it is written.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvSink {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let existing = match File::open(&path) {
            Ok(f) => {
                let mut first = String::new();
                BufReader::new(f).read_line(&mut first).map_err(io_error(&path))?;
                Some(first)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(io_error(&path)(e)),
        };
        let needs_header = match existing.as_deref() {
            None | Some("") => true,
            Some(line) if line.trim_end_matches(['\r', '\n']) == CSV_HEADER => false,
            Some(_) => {
                return Err(Error::Parse {
                    path,
                    line: 1,
                    msg: format!("existing file does not start with `{CSV_HEADER}`"),
                })
            }
        };
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_error(&path))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if needs_header {
            writer.write_record(CSV_HEADER.split(',')).map_err(|e| csv_error(&path, e))?;
            writer.flush().map_err(io_error(&path))?;
        }
        Ok(Self { path, writer })
    }

    pub fn write(&mut self, point: &CurvePoint) -> Result<()> {
        self.writer.serialize(point).map_err(|e| csv_error(&self.path, e))?;
        self.writer.flush().map_err(io_error(&self.path))
    }
}

/// Append `points` to `path`; the header is written once.
pub fn export_results(points: &[CurvePoint], path: impl AsRef<Path>) -> Result<()> {
    let mut sink = CsvSink::open(path)?;
    points.iter().try_for_each(|p| sink.write(p))
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<CurvePoint>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_error(path))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header `{CSV_HEADER}`"),
        });
    }
    reader.deserialize().map(|r| r.map_err(|e| csv_error(path, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVec;
    use crate::code::Syndrome;
    use crate::decoder::{DecoderKind, DecoderParams, RegisteredDecoder};
    use crate::pauli::PauliOperator;

    fn label(p: f64) -> PointLabel {
        PointLabel {
            decoder: "mwpm".into(),
            eta: 0.5,
            p,
        }
    }

    #[test]
    fn noiseless_point_is_an_upper_bound() {
        let code = RotatedPlanarCode::new(3).unwrap();
        let noise = NoiseModel::depolarizing(9, 0.0).unwrap();
        let dec = RegisteredDecoder::new(DecoderKind::Mwpm, DecoderParams::default(), &code, &noise).unwrap();
        let stop = StopRule {
            target_failures: 100,
            max_trials: 500,
        };
        let pt = run_point(&code, &noise, &dec, &label(0.0), &stop, 1).unwrap();
        assert_eq!((pt.trials, pt.failures, pt.p_l), (500, 0, 0.0));
        assert!(pt.is_upper_bound());
        assert_eq!(pt.ci_high, 3.0 / 500.0);
    }

    #[test]
    fn same_seed_same_point() {
        let code = RotatedPlanarCode::new(5).unwrap();
        let noise = NoiseModel::depolarizing(25, 0.12).unwrap();
        let dec = RegisteredDecoder::new(DecoderKind::Uf, DecoderParams::default(), &code, &noise).unwrap();
        let stop = StopRule {
            target_failures: 30,
            max_trials: 100_000,
        };
        let a = run_point(&code, &noise, &dec, &label(0.12), &stop, 77).unwrap();
        let b = run_point(&code, &noise, &dec, &label(0.12), &stop, 77).unwrap();
        assert_eq!((a.trials, a.failures, a.p_l, a.ci_low), (b.trials, b.failures, b.p_l, b.ci_low));
        assert_eq!(a.failures, 30);
        // identical under a single worker
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run_point(&code, &noise, &dec, &label(0.12), &stop, 77).unwrap());
        assert_eq!((a.trials, a.failures), (c.trials, c.failures));
    }

    #[test]
    fn stop_is_exact_at_target() {
        // a decoder that always fails: the run ends at trial == target
        struct Never(PauliOperator);
        impl Decoder for Never {
            fn decode(&self, _: &Syndrome, _: Option<&BitVec>) -> Result<PauliOperator> {
                Ok(self.0.clone())
            }
        }
        let code = RotatedPlanarCode::new(3).unwrap();
        let noise = NoiseModel::depolarizing(9, 0.0).unwrap();
        let never = Never(code.logical_x().clone());
        let pt = run_point(&code, &noise, &never, &label(0.0), &StopRule::default(), 3).unwrap();
        assert_eq!((pt.trials, pt.failures, pt.p_l), (100, 100, 1.0));
    }

    #[test]
    fn trial_classification_rechecks() {
        let code = RotatedPlanarCode::new(5).unwrap();
        let noise = NoiseModel::depolarizing(25, 0.15).unwrap();
        let dec = RegisteredDecoder::new(DecoderKind::Bp, DecoderParams::default(), &code, &noise).unwrap();
        for t in 0..300 {
            let o = run_trial(&code, &noise, &dec, 5, t).unwrap();
            let e = sample_error(&noise, &mut trial_rng(5, t)).pauli;
            let s = code.syndrome(&e).unwrap();
            let r = e.multiply(&dec.decode(&s, None).unwrap()).unwrap();
            let matched = code.syndrome(&r).unwrap().is_trivial();
            assert_eq!(o.syndrome_matched, matched);
            assert_eq!(o.success, matched && code.logical_class(&r).unwrap() == LogicalClass::I);
        }
    }

    #[test]
    fn interval_factors() {
        let (lo, hi) = confidence_interval(100, 10_000);
        assert_eq!((lo, hi), (0.8 * 0.01, 1.25 * 0.01));
        let (lo, hi) = confidence_interval(250, 1000);
        assert_eq!((lo, hi), (0.8 * 0.25, 1.25 * 0.25));
        let (lo, hi) = confidence_interval(25, 1000);
        assert!((lo - 0.64 * 0.025).abs() < 1e-15 && (hi - 1.5625 * 0.025).abs() < 1e-15);
        assert_eq!(confidence_interval(0, 300), (0.0, 0.01));
    }

    fn synthetic(ds: &[usize], grid: &[f64], f: impl Fn(usize, f64) -> f64) -> Vec<CurvePoint> {
        let mut out = Vec::new();
        for &d in ds {
            for &p in grid {
                let mut pt = CurvePoint::new("syn", d, 0.5, p, 1000, 100, 0, 0.0);
                pt.p_l = f(d, p);
                out.push(pt);
            }
        }
        out
    }

    #[test]
    fn synthetic_power_laws_cross_at_their_pivot() {
        let grid: Vec<f64> = (0..9).map(|k| 0.06 + 0.01 * k as f64).collect();
        let pts = synthetic(&[3, 5, 7], &grid, |d, p| (p / 0.1).powi(d as i32));
        let ThresholdResult::Found(t) = estimate_threshold(&pts).unwrap() else { panic!("no crossing") };
        assert!((t.p_th - 0.1).abs() <= 0.01);
        assert_eq!(t.crossings.len(), 2);
        // pivot on a grid point is located exactly
        for c in &t.crossings {
            assert!((c.p - 0.1).abs() < 1e-12);
        }
        let off: Vec<f64> = (0..9).map(|k| 0.063 + 0.01 * k as f64).collect();
        let pts = synthetic(&[3, 5], &off, |d, p| (p / 0.1).powi(d as i32));
        let ThresholdResult::Found(t) = estimate_threshold(&pts).unwrap() else { panic!("no crossing") };
        assert!((t.p_th - 0.1).abs() <= 0.01);
    }

    #[test]
    fn ordered_curves_have_no_threshold() {
        let grid: Vec<f64> = (0..11).map(|k| 0.05 + 0.01 * k as f64).collect();
        let pts = synthetic(&[3, 5, 7], &grid, |d, p| (p * d as f64).min(0.9));
        assert_eq!(estimate_threshold(&pts).unwrap(), ThresholdResult::NoThreshold);
    }

    #[test]
    fn single_distance_is_rejected() {
        let pts = synthetic(&[5], &[0.1, 0.2], |_, p| p);
        assert!(estimate_threshold(&pts).is_err());
    }

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("surfdec-eval-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        let _ = std::fs::remove_file(&p);
        p
    }

    #[test]
    fn empty_export_is_header_only() {
        let path = tmp("empty.csv");
        export_results(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
        assert!(read_results(&path).unwrap().is_empty());
    }

    #[test]
    fn export_round_trips_and_appends() {
        let path = tmp("round.csv");
        let a = CurvePoint::new("mwpm", 5, 0.5, 0.13, 12_345, 100, 42, 1.234_567_89);
        let b = CurvePoint::new("tn", 3, f64::INFINITY, 0.1 + 0.2, 4000, 0, 7, 0.01);
        export_results(std::slice::from_ref(&a), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        export_results(std::slice::from_ref(&b), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("decoder,").count(), 1);
        assert!(!text.contains('\r'));
        assert_eq!(read_results(&path).unwrap(), vec![a, b]);
    }

    #[test]
    fn foreign_file_is_not_appended_to() {
        let path = tmp("foreign.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(export_results(&[], &path), Err(Error::Parse { .. })));
        assert!(matches!(read_results(&path), Err(Error::Parse { .. })));
        assert!(matches!(read_results(tmp("missing.csv")), Err(Error::Io { .. })));
    }
}
