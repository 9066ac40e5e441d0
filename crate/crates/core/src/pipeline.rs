//! End-to-end orchestration: landmarks → filtration → persistence → scale →
//! lift → harmonic smoothing → evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::cohomology::{
    choose_scale, joint_scale, persistent_cohomology, ranked_classes, representative_at_scale, ClassSelector,
    ModCochain, PersistencePair, PersistenceResult,
};
use crate::coords::{combine, evaluate_all, AngleAssignment, CoordinateMode, CoordinateModel, Targets};
use crate::filtration::{build_rips, RipsFiltration};
use crate::harmonic::{harmonic_smooth, EdgeWeightRule, HarmonicPair, SolverOptions, VertexWeights, WeightScheme};
use crate::landmarks::{maxmin_landmarks, random_landmarks, LandmarkSet, SamplingMethod};
use crate::lift::{lift_cocycle, IntegerCochain};
use crate::metric::DistanceSource;
use crate::synth::{Shape, SynthSpec};
use crate::{Error, Result};

pub const DEFAULT_PRIME: u32 = 47;
pub const DEFAULT_T: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    MetricIo,
    Landmarks,
    Filtration,
    Cohomology,
    Scale,
    Lift,
    Harmonic,
    Coords,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::MetricIo => "metric_io",
            Stage::Landmarks => "landmarks",
            Stage::Filtration => "filtration",
            Stage::Cohomology => "cohomology",
            Stage::Scale => "scale",
            Stage::Lift => "lift",
            Stage::Harmonic => "harmonic",
            Stage::Coords => "coords",
        }
    }

    fn hint(self, error: &Error) -> &'static str {
        match (self, error) {
            (_, Error::NoQualifyingClass(_)) => "increase --landmarks to shrink r_L, or select another --class",
            (_, Error::LiftFailure { .. }) => "rerun with a different --prime",
            (_, Error::Convergence { .. }) => "raise --tol or use --solver dense-svd",
            (Stage::MetricIo, _) => "check the input path, --delimiter and --header",
            (Stage::Landmarks, _) => "check --landmarks and --start against the data size",
            _ => "",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.error)?;
        let hint = self.stage.hint(&self.error);
        if !hint.is_empty() {
            write!(f, " (hint: {hint})")?;
        }
        Ok(())
    }
}

impl std::error::Error for StageError {}

impl StageError {
    pub fn new(stage: Stage, error: Error) -> Self {
        Self { stage, error }
    }

    /// 2 for data-dependent failures the user can act on, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.error {
            Error::NoQualifyingClass(_) | Error::LiftFailure { .. } => 2,
            _ => 1,
        }
    }
}

/// One requested output column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSpec {
    Single(ClassSelector),
    /// Sum of ranked classes; combined at cocycle level when they share an
    /// admissible scale, otherwise as a product of circle maps.
    Sum(Vec<usize>),
}

impl FromStr for ClassSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "most-persistent" {
            return Ok(ClassSpec::Single(ClassSelector::MostPersistent));
        }
        let parts = s
            .split('+')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::arg(format!("class must be 'most-persistent', K or K1+K2+..., got {s:?}")))?;
        match parts.as_slice() {
            [k] => Ok(ClassSpec::Single(ClassSelector::Rank(*k))),
            _ => Ok(ClassSpec::Sum(parts)),
        }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassSpec::Single(ClassSelector::MostPersistent) => f.write_str("most-persistent"),
            ClassSpec::Single(ClassSelector::Rank(k)) => write!(f, "{k}"),
            ClassSpec::Sum(ks) => {
                let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                f.write_str(&parts.join("+"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkOptions {
    pub count: usize,
    pub sampling: SamplingMethod,
    pub start: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub landmarks: LandmarkOptions,
    pub prime: u32,
    pub t: f64,
    pub classes: Vec<ClassSpec>,
    pub edge_weights: EdgeWeightRule,
    pub solver: SolverOptions,
    pub mode: CoordinateMode,
    /// Persistence threshold; defaults to just above the landmark diameter.
    pub threshold: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            landmarks: LandmarkOptions {
                count: 50,
                sampling: SamplingMethod::Maxmin,
                start: 0,
                seed: 0,
            },
            prime: DEFAULT_PRIME,
            t: DEFAULT_T,
            classes: vec![ClassSpec::Single(ClassSelector::MostPersistent)],
            edge_weights: EdgeWeightRule::Distance,
            solver: SolverOptions::default(),
            mode: CoordinateMode::Harmonic,
            threshold: None,
        }
    }
}

/// One smoothed class: the cochains on `R_{2α}` and the resulting model.
#[derive(Clone, Debug)]
pub struct ClassRun {
    /// Indices into the persistence pairs.
    pub pair_indices: Vec<usize>,
    pub alpha: f64,
    pub filtration: RipsFiltration,
    pub cocycle_mod_q: ModCochain,
    pub lift: IntegerCochain,
    pub harmonic: HarmonicPair,
    pub model: CoordinateModel,
    pub angles: AngleAssignment,
}

impl ClassRun {
    /// A model evaluating the lifted integer cocycle directly.
    pub fn integer_model(&self) -> CoordinateModel {
        CoordinateModel::integer(
            self.model.landmarks.clone(),
            self.alpha,
            &self.filtration,
            &self.lift,
            self.model.prime,
            self.model.class_label.clone(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinationPath {
    Single,
    Cocycle,
    Map,
}

#[derive(Clone, Debug)]
pub struct ClassOutcome {
    pub label: String,
    pub combination: CombinationPath,
    pub runs: Vec<ClassRun>,
    pub angles: AngleAssignment,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub landmarks: LandmarkSet,
    pub filtration: RipsFiltration,
    pub persistence: PersistenceResult,
    pub classes: Vec<ClassOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunPart {
    pub pairs: Vec<(f64, f64)>,
    pub alpha: f64,
    pub edges_2alpha: usize,
    pub triangles_2alpha: usize,
    pub solver: crate::harmonic::Solver,
    pub residual: f64,
    pub normal_residual: f64,
    pub iterations: usize,
    pub uncovered: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassMetadata {
    pub label: String,
    pub combination: CombinationPath,
    pub parts: Vec<RunPart>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub stage: Stage,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub status: String,
    pub error: Option<ErrorInfo>,
    pub config: BTreeMap<String, String>,
    pub n_points: Option<usize>,
    pub n_landmarks: Option<usize>,
    pub coverage_radius: Option<f64>,
    pub prime: u32,
    pub threshold: Option<f64>,
    pub dim0_pairs: Option<usize>,
    pub dim1_pairs: Option<usize>,
    pub lift_status: String,
    pub lift_failures: usize,
    pub classes: Vec<ClassMetadata>,
    pub timings: Vec<StageTiming>,
    pub total_seconds: f64,
}

impl RunMetadata {
    pub fn new(config: BTreeMap<String, String>, prime: u32) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            status: "ok".into(),
            error: None,
            config,
            n_points: None,
            n_landmarks: None,
            coverage_radius: None,
            prime,
            threshold: None,
            dim0_pairs: None,
            dim1_pairs: None,
            lift_status: "not-run".into(),
            lift_failures: 0,
            classes: Vec::new(),
            timings: Vec::new(),
            total_seconds: 0.0,
        }
    }

    pub fn record_error(&mut self, err: &StageError) {
        self.status = "error".into();
        if matches!(err.error, Error::LiftFailure { .. }) {
            self.lift_failures += 1;
            self.lift_status = "failed".into();
        }
        self.error = Some(ErrorInfo {
            stage: err.stage,
            message: err.to_string(),
            exit_code: err.exit_code(),
        });
    }

    fn add_timing(&mut self, stage: Stage, seconds: f64) {
        match self.timings.iter_mut().find(|t| t.stage == stage) {
            Some(t) => t.seconds += seconds,
            None => self.timings.push(StageTiming { stage, seconds }),
        }
    }
}

impl PipelineConfig {
    /// Flat key/value view of the effective configuration.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("landmarks".into(), self.landmarks.count.to_string());
        m.insert(
            "sampling".into(),
            match self.landmarks.sampling {
                SamplingMethod::Maxmin => "maxmin",
                SamplingMethod::Random => "random",
            }
            .into(),
        );
        m.insert("start".into(), self.landmarks.start.to_string());
        m.insert("seed".into(), self.landmarks.seed.to_string());
        m.insert("prime".into(), self.prime.to_string());
        m.insert("t".into(), self.t.to_string());
        let classes: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        m.insert("class".into(), classes.join(","));
        m.insert(
            "weights".into(),
            match self.edge_weights {
                EdgeWeightRule::Distance => "paper",
                EdgeWeightRule::Uniform => "uniform",
            }
            .into(),
        );
        m.insert(
            "solver".into(),
            match self.solver.solver {
                crate::harmonic::Solver::Iterative => "iterative",
                crate::harmonic::Solver::DenseSvd => "dense-svd",
            }
            .into(),
        );
        m.insert("tol".into(), format!("{:e}", self.solver.tolerance));
        if let Some(cap) = self.solver.max_iterations {
            m.insert("max-iter".into(), cap.to_string());
        }
        m.insert(
            "mode".into(),
            match self.mode {
                CoordinateMode::Harmonic => "harmonic",
                CoordinateMode::Integer => "integer",
            }
            .into(),
        );
        if let Some(t) = self.threshold {
            m.insert("threshold".into(), t.to_string());
        }
        m
    }
}

/// Result of a pipeline run; metadata is filled in whether or not it succeeded.
pub struct PipelineRun {
    pub metadata: RunMetadata,
    pub outcome: std::result::Result<PipelineOutput, StageError>,
}

struct Runner<'a> {
    src: &'a DistanceSource,
    config: &'a PipelineConfig,
    metadata: RunMetadata,
}

impl<'a> Runner<'a> {
    fn timed<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T>) -> std::result::Result<T, StageError> {
        let start = Instant::now();
        let out = f();
        self.metadata.add_timing(stage, start.elapsed().as_secs_f64());
        out.map_err(|e| StageError::new(stage, e))
    }

    fn run(&mut self) -> std::result::Result<PipelineOutput, StageError> {
        let cfg = self.config;
        let src = self.src;
        self.metadata.n_points = Some(src.len());

        let landmarks = self.timed(Stage::Landmarks, || match cfg.landmarks.sampling {
            SamplingMethod::Maxmin => maxmin_landmarks(src, cfg.landmarks.count, cfg.landmarks.start),
            SamplingMethod::Random => random_landmarks(src, cfg.landmarks.count, cfg.landmarks.seed),
        })?;
        self.metadata.n_landmarks = Some(landmarks.len());
        self.metadata.coverage_radius = Some(landmarks.coverage_radius);

        let filtration = self.timed(Stage::Filtration, || {
            let sub = src.submatrix(&landmarks.indices);
            let threshold = cfg.threshold.unwrap_or_else(|| sub.diameter().next_up());
            build_rips(&sub, threshold, 2)
        })?;
        self.metadata.threshold = Some(filtration.threshold());

        let persistence = self.timed(Stage::Cohomology, || persistent_cohomology(&filtration, cfg.prime))?;
        self.metadata.dim0_pairs = Some(persistence.dim(0).count());
        self.metadata.dim1_pairs = Some(persistence.dim(1).count());

        let mut classes = Vec::new();
        for spec in &cfg.classes {
            let outcome = self.run_class(spec, &landmarks, &filtration, &persistence)?;
            self.metadata.classes.push(ClassMetadata {
                label: outcome.label.clone(),
                combination: outcome.combination,
                parts: outcome
                    .runs
                    .iter()
                    .map(|r| RunPart {
                        pairs: r
                            .pair_indices
                            .iter()
                            .map(|&k| {
                                let p = &persistence.pairs[k];
                                (p.birth, p.death.unwrap_or(f64::INFINITY))
                            })
                            .collect(),
                        alpha: r.alpha,
                        edges_2alpha: r.filtration.edges().len(),
                        triangles_2alpha: r.filtration.triangles().len(),
                        solver: r.harmonic.solver,
                        residual: r.harmonic.residual,
                        normal_residual: r.harmonic.normal_residual,
                        iterations: r.harmonic.iterations,
                        uncovered: r.angles.iter().filter(|a| a.is_none()).count(),
                    })
                    .collect(),
            });
            classes.push(outcome);
        }
        Ok(PipelineOutput {
            landmarks,
            filtration,
            persistence,
            classes,
        })
    }

    fn run_class(
        &mut self,
        spec: &ClassSpec,
        landmarks: &LandmarkSet,
        filtration: &RipsFiltration,
        persistence: &PersistenceResult,
    ) -> std::result::Result<ClassOutcome, StageError> {
        let cfg = self.config;
        let pairs = &persistence.pairs;
        let r_l = landmarks.coverage_radius;
        let label = spec.to_string();
        match spec {
            ClassSpec::Single(selector) => {
                let choice = self.timed(Stage::Scale, || choose_scale(pairs, r_l, cfg.t, *selector))?;
                let pair = &pairs[choice.pair_index];
                let rep = self.timed(Stage::Scale, || {
                    representative_at_scale(pair, filtration, 2.0 * choice.alpha)
                })?;
                let run = self.smooth(vec![choice.pair_index], choice.alpha, rep, landmarks, filtration, &label)?;
                Ok(ClassOutcome {
                    label,
                    combination: CombinationPath::Single,
                    angles: run.angles.clone(),
                    runs: vec![run],
                })
            }
            ClassSpec::Sum(ranks) => {
                let ranked = ranked_classes(pairs);
                let indices = self.timed(Stage::Scale, || {
                    ranks
                        .iter()
                        .map(|&r| {
                            ranked.get(r).copied().ok_or_else(|| {
                                Error::arg(format!("class {r} requested but only {} finite classes exist", ranked.len()))
                            })
                        })
                        .collect::<Result<Vec<usize>>>()
                })?;
                let selected: Vec<&PersistencePair> = indices.iter().map(|&k| &pairs[k]).collect();
                match joint_scale(&selected, r_l, cfg.t) {
                    Ok(alpha) => {
                        let rep = self.timed(Stage::Scale, || {
                            let reps = selected
                                .iter()
                                .map(|p| representative_at_scale(p, filtration, 2.0 * alpha))
                                .collect::<Result<Vec<_>>>()?;
                            let terms: Vec<(i64, &ModCochain)> = reps.iter().map(|r| (1, r)).collect();
                            ModCochain::linear_combination(&terms)
                        })?;
                        let run = self.smooth(indices, alpha, rep, landmarks, filtration, &label)?;
                        Ok(ClassOutcome {
                            label,
                            combination: CombinationPath::Cocycle,
                            angles: run.angles.clone(),
                            runs: vec![run],
                        })
                    }
                    Err(Error::NoQualifyingClass(_)) => {
                        let mut runs = Vec::new();
                        for &r in ranks {
                            let selector = ClassSelector::Rank(r);
                            let choice = self.timed(Stage::Scale, || choose_scale(pairs, r_l, cfg.t, selector))?;
                            let rep = self.timed(Stage::Scale, || {
                                representative_at_scale(&pairs[choice.pair_index], filtration, 2.0 * choice.alpha)
                            })?;
                            runs.push(self.smooth(
                                vec![choice.pair_index],
                                choice.alpha,
                                rep,
                                landmarks,
                                filtration,
                                &r.to_string(),
                            )?);
                        }
                        let angles = self.timed(Stage::Coords, || {
                            let columns: Vec<AngleAssignment> = runs.iter().map(|r| r.angles.clone()).collect();
                            combine(&columns, &vec![1; columns.len()])
                        })?;
                        Ok(ClassOutcome {
                            label,
                            combination: CombinationPath::Map,
                            runs,
                            angles,
                        })
                    }
                    Err(e) => Err(StageError::new(Stage::Scale, e)),
                }
            }
        }
    }

    fn smooth(
        &mut self,
        pair_indices: Vec<usize>,
        alpha: f64,
        cocycle_mod_q: ModCochain,
        landmarks: &LandmarkSet,
        filtration: &RipsFiltration,
        label: &str,
    ) -> std::result::Result<ClassRun, StageError> {
        let cfg = self.config;
        let filt_2alpha = self.timed(Stage::Scale, || filtration.restrict(2.0 * alpha))?;
        let lift = self.timed(Stage::Lift, || lift_cocycle(&cocycle_mod_q, &filt_2alpha))?;
        self.metadata.lift_status = "ok".into();
        let weights = WeightScheme {
            vertex: VertexWeights::Uniform,
            edge_rule: cfg.edge_weights,
        };
        let harmonic = self.timed(Stage::Harmonic, || harmonic_smooth(&lift, &filt_2alpha, &weights, &cfg.solver))?;
        let prime = cocycle_mod_q.prime();
        let model = match cfg.mode {
            CoordinateMode::Harmonic => {
                CoordinateModel::harmonic(landmarks.indices.clone(), alpha, &filt_2alpha, &harmonic, prime, label)
            }
            CoordinateMode::Integer => {
                CoordinateModel::integer(landmarks.indices.clone(), alpha, &filt_2alpha, &lift, prime, label)
            }
        };
        let angles = self.timed(Stage::Coords, || evaluate_all(&model, self.src, &Targets::AllData))?;
        Ok(ClassRun {
            pair_indices,
            alpha,
            filtration: filt_2alpha,
            cocycle_mod_q,
            lift,
            harmonic,
            model,
            angles,
        })
    }
}

pub fn run_pipeline(src: &DistanceSource, config: &PipelineConfig) -> PipelineRun {
    let start = Instant::now();
    let mut runner = Runner {
        src,
        config,
        metadata: RunMetadata::new(config.describe(), config.prime),
    };
    let outcome = runner.run();
    let mut metadata = runner.metadata;
    if let Err(e) = &outcome {
        metadata.record_error(e);
    }
    metadata.total_seconds = start.elapsed().as_secs_f64();
    PipelineRun { metadata, outcome }
}

/// Fixed synthetic experiments with their data sizes, seeds and settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Circle,
    Torus,
    Klein,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Figure::Circle),
            "torus" => Ok(Figure::Torus),
            "klein" => Ok(Figure::Klein),
            _ => Err(Error::arg(format!("figure must be circle, torus or klein, got {s:?}"))),
        }
    }
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::Circle, Figure::Torus, Figure::Klein];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Circle => "circle",
            Figure::Torus => "torus",
            Figure::Klein => "klein",
        }
    }

    pub fn synth_spec(self) -> SynthSpec {
        match self {
            Figure::Circle => SynthSpec {
                shape: Shape::NoisyCircle,
                n: 1000,
                noise_sigma: 0.1,
                seed: 1,
            },
            Figure::Torus => SynthSpec {
                shape: Shape::Torus,
                n: 1000,
                noise_sigma: 0.0,
                seed: 2,
            },
            Figure::Klein => SynthSpec {
                shape: Shape::KleinBottle,
                n: 1000,
                noise_sigma: 0.0,
                seed: 3,
            },
        }
    }

    pub fn config(self) -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        match self {
            Figure::Circle => cfg.landmarks.count = 50,
            Figure::Torus => {
                cfg.landmarks.count = 100;
                cfg.classes = vec![
                    ClassSpec::Single(ClassSelector::Rank(0)),
                    ClassSpec::Single(ClassSelector::Rank(1)),
                ];
            }
            Figure::Klein => {
                cfg.landmarks.count = 100;
                cfg.prime = 13;
            }
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_spec_parsing() {
        assert_eq!(
            "most-persistent".parse::<ClassSpec>().unwrap(),
            ClassSpec::Single(ClassSelector::MostPersistent)
        );
        assert_eq!("3".parse::<ClassSpec>().unwrap(), ClassSpec::Single(ClassSelector::Rank(3)));
        assert_eq!("0+4".parse::<ClassSpec>().unwrap(), ClassSpec::Sum(vec![0, 4]));
        assert!("x".parse::<ClassSpec>().is_err());
        assert!("1+".parse::<ClassSpec>().is_err());
        assert_eq!(ClassSpec::Sum(vec![0, 4]).to_string(), "0+4");
    }

    #[test]
    fn exit_codes() {
        let e = StageError::new(
            Stage::Scale,
            Error::NoQualifyingClass(Box::new(crate::NoQualifyingClass {
                candidate: None,
                coverage_radius: 1.0,
                reason: "x".into(),
            })),
        );
        assert_eq!(e.exit_code(), 2);
        assert_eq!(StageError::new(Stage::MetricIo, Error::arg("x")).exit_code(), 1);
    }
}
