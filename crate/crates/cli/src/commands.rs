//! Subcommand implementations: artifact plumbing around the core pipeline.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use circlet::coords::{evaluate_all, AngleAssignment, Targets};
use circlet::io::{
    load_distance_matrix, load_point_cloud, write_cocycle, write_coordinates, write_diagram, write_distance_matrix,
    write_filtration, write_point_cloud,
};
use circlet::metric::DistanceSource;
use circlet::pipeline::{run_pipeline, Figure, PipelineOutput, RunMetadata, Stage, StageError};
use circlet::svg::scatter;
use circlet::synth::{generate, Shape, SynthData, SynthSpec};

use crate::args::{resolve, InputKind, ReproduceArgs, RunArgs, ShapeArg, SynthArgs};
use crate::CliError;

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> circlet::Result<()>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| output_error(path, e))?;
    }
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| output_error(path, e))?;
    w.flush().map_err(|e| output_error(path, e))
}

/// Writes to `path`, or to stdout when no path is given.
fn write_or_stdout(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> circlet::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, f),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| output_error(Path::new("<stdout>"), e))?;
            lock.flush().map_err(|e| output_error(Path::new("<stdout>"), e))
        }
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::from)?;
        writeln!(w)?;
        Ok(())
    })
}

/// `out.csv` for the first item, `out_2.csv`, `out_3.csv`, ... after that.
fn indexed_path(path: &Path, k: usize) -> PathBuf {
    if k == 0 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{}.{}", k + 1, ext.to_string_lossy()),
        None => format!("{stem}_{}", k + 1),
    };
    path.with_file_name(name)
}

fn planar_coordinates(src: &DistanceSource) -> Option<Vec<(f64, f64)>> {
    let cloud = src.as_cloud()?;
    Some(
        cloud
            .points()
            .map(|p| (p[0], p.get(1).copied().unwrap_or(0.0)))
            .collect(),
    )
}

fn write_coordinate_artifacts(
    output: &PipelineOutput,
    n: usize,
    csv: Option<&Path>,
    turns: bool,
) -> Result<(), CliError> {
    let ids: Vec<usize> = (0..n).collect();
    let columns: Vec<AngleAssignment> = output.classes.iter().map(|c| c.angles.clone()).collect();
    write_or_stdout(csv, |w| write_coordinates(w, &ids, &columns, turns))
}

pub fn run(args: &RunArgs, diagram_only: bool) -> Result<(), CliError> {
    let mut cfg = resolve(args)?;
    if diagram_only {
        cfg.pipeline.classes.clear();
    }
    let loaded = match cfg.kind {
        InputKind::Cloud => load_point_cloud(&cfg.input, cfg.csv),
        InputKind::Matrix => load_distance_matrix(&cfg.input, cfg.csv),
    };
    let src = match loaded {
        Ok(src) => src,
        Err(e) => {
            let err = StageError::new(Stage::MetricIo, e);
            if let Some(meta) = &cfg.meta {
                let mut md = RunMetadata::new(cfg.pipeline.describe(), cfg.pipeline.prime);
                md.record_error(&err);
                write_json(meta, &md)?;
            }
            return Err(err.into());
        }
    };

    let run = run_pipeline(&src, &cfg.pipeline);
    if let Some(meta) = &cfg.meta {
        write_json(meta, &run.metadata)?;
    }
    let output = run.outcome?;

    if let Some(path) = &cfg.dump_filtration {
        write_file(path, |w| write_filtration(w, &output.filtration))?;
    }
    if diagram_only {
        let target = cfg.diagram.as_deref().or(cfg.out.as_deref());
        return write_or_stdout(target, |w| write_diagram(w, &output.persistence.pairs));
    }
    if let Some(path) = &cfg.diagram {
        write_file(path, |w| write_diagram(w, &output.persistence.pairs))?;
    }
    if let Some(path) = &cfg.dump_cocycle {
        let lifts = output.classes.iter().flat_map(|c| c.runs.iter().map(|r| &r.lift));
        for (k, lift) in lifts.enumerate() {
            write_file(&indexed_path(path, k), |w| write_cocycle(w, lift))?;
        }
    }
    if let Some(path) = &cfg.svg {
        match planar_coordinates(&src) {
            Some(xy) => {
                for (k, class) in output.classes.iter().enumerate() {
                    let title = format!("class {}", class.label);
                    let doc = scatter(&xy, &class.angles, &output.landmarks.indices, &title);
                    write_file(&indexed_path(path, k), |w| Ok(w.write_all(doc.as_bytes())?))?;
                }
            }
            None => eprintln!("warning: --svg needs point coordinates; skipped for a distance-matrix input"),
        }
    }
    write_coordinate_artifacts(&output, src.len(), cfg.out.as_deref(), cfg.turns)
}

fn write_synth_data(data: &SynthData, out: &Path) -> Result<(), CliError> {
    write_file(out, |w| match &data.source {
        DistanceSource::Cloud(c) => write_point_cloud(w, c),
        DistanceSource::Matrix(m) => write_distance_matrix(w, m),
    })
}

fn write_parameters(data: &SynthData, out: &Path) -> Result<(), CliError> {
    write_file(out, |w| {
        for row in &data.parameters {
            let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    })
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let shape = match args.shape {
        ShapeArg::Circle => Shape::NoisyCircle,
        ShapeArg::Torus => Shape::Torus,
        ShapeArg::Klein => Shape::KleinBottle,
    };
    let spec = SynthSpec {
        shape,
        n: args.n,
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    let data = generate(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    write_synth_data(&data, &args.out)?;
    if let Some(meta) = &args.meta {
        write_parameters(&data, meta)?;
    }
    Ok(())
}

fn svg_plane(figure: Figure, data: &SynthData) -> Vec<(f64, f64)> {
    match figure {
        Figure::Circle => planar_coordinates(&data.source).expect("circle data is a point cloud"),
        Figure::Torus | Figure::Klein => data.parameters.iter().map(|p| (p[0], p[1])).collect(),
    }
}

pub fn reproduce(args: &ReproduceArgs) -> Result<(), CliError> {
    let dir = &args.out_dir;
    for figure in args.figure.figures() {
        let name = figure.name();
        let spec = figure.synth_spec();
        let data = generate(&spec).map_err(|e| CliError::Config(e.to_string()))?;
        if matches!(data.source, DistanceSource::Cloud(_)) {
            write_synth_data(&data, &dir.join(format!("{name}_points.csv")))?;
        }
        write_parameters(&data, &dir.join(format!("{name}_params.csv")))?;

        let config = figure.config();
        let run = run_pipeline(&data.source, &config);
        write_json(&dir.join(format!("{name}_meta.json")), &run.metadata)?;
        let output = run.outcome?;
        write_file(&dir.join(format!("{name}_diagram.json")), |w| {
            write_diagram(w, &output.persistence.pairs)
        })?;
        let coords = dir.join(format!("{name}_coords.csv"));
        write_coordinate_artifacts(&output, data.source.len(), Some(&coords), false)?;

        let plane = svg_plane(figure, &data);
        for (k, class) in output.classes.iter().enumerate() {
            let doc = scatter(&plane, &class.angles, &output.landmarks.indices, &format!("{name}: class {}", class.label));
            write_file(&indexed_path(&dir.join(format!("{name}.svg")), k), |w| Ok(w.write_all(doc.as_bytes())?))?;
        }
        if figure == Figure::Circle {
            let run = &output.classes[0].runs[0];
            let integer = evaluate_all(&run.integer_model(), &data.source, &Targets::AllData)
                .map_err(|e| StageError::new(Stage::Coords, e))?;
            let doc = scatter(&plane, &integer, &output.landmarks.indices, "circle: integer cocycle");
            write_file(&dir.join("circle_integer.svg"), |w| Ok(w.write_all(doc.as_bytes())?))?;
        }

        let qualifying = run
            .metadata
            .classes
            .iter()
            .flat_map(|c| c.parts.iter())
            .map(|p| format!("alpha={:.4}", p.alpha))
            .collect::<Vec<_>>()
            .join(" ");
        println!(
            "{name}: n={} landmarks={} q={} r_L={:.4} dim1_pairs={} {qualifying}",
            data.source.len(),
            output.landmarks.len(),
            config.prime,
            output.landmarks.coverage_radius,
            output.persistence.dim(1).count(),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_paths() {
        assert_eq!(indexed_path(Path::new("a/out.csv"), 0), PathBuf::from("a/out.csv"));
        assert_eq!(indexed_path(Path::new("a/out.csv"), 1), PathBuf::from("a/out_2.csv"));
        assert_eq!(indexed_path(Path::new("out"), 2), PathBuf::from("out_3"));
    }
}
