use std::path::Path;

use molgp::analysis::{self, Binning, EmbedMode};
use molgp::gpr::TrainingSource;
use molgp::io::{load_csv, load_model, load_molecules, save_model, write_json, MatrixJson, Molecule, RunConfig};
use molgp::kernel::{kernel_matrix, KernelHyperparameters};
use molgp::molgraph::{edge_weight, AdjacencyConvention, MolecularGraph, VertexLabel};
use molgp::selection::{self, evaluate_protocol, CvReport};
use molgp::smiles::graph_from_smiles;
use molgp::{GpHyperparameters, RadiiTable, TrainedModel};
use serde::Serialize;

type Result<T> = molgp::Result<T>;

fn graphs_of(molecules: &[Molecule], radii: &RadiiTable) -> Result<Vec<MolecularGraph>> {
    Ok(molecules
        .iter()
        .map(|m| graph_from_smiles(&m.smiles, m.id.clone(), radii))
        .collect::<std::result::Result<_, _>>()?)
}

#[derive(Serialize)]
struct ParsedEdge {
    i: usize,
    j: usize,
    #[serde(flatten)]
    label: molgp::molgraph::EdgeLabel,
    sigma: f64,
    weight: f64,
}

#[derive(Serialize)]
struct ParseOutput<'a> {
    smiles: &'a str,
    zeta: f64,
    adjacency: AdjacencyConvention,
    vertices: &'a [VertexLabel],
    edges: Vec<ParsedEdge>,
}

pub fn parse(config: &RunConfig, smiles: &str, out: &Path) -> Result<()> {
    let graph = graph_from_smiles(smiles, "", &config.radii)?;
    let k = &config.kernel;
    let edges = graph
        .edges()
        .iter()
        .map(|e| ParsedEdge {
            i: e.i,
            j: e.j,
            label: e.label,
            sigma: e.sigma,
            weight: edge_weight(e.label.length, e.sigma, k.zeta, k.adjacency),
        })
        .collect();
    let output = ParseOutput {
        smiles,
        zeta: k.zeta,
        adjacency: k.adjacency,
        vertices: graph.vertices(),
        edges,
    };
    Ok(write_json(out, &output)?)
}

#[derive(Serialize)]
struct KernelOutput {
    ids: Vec<String>,
    normalized: bool,
    hyperparameters: KernelHyperparameters,
    matrix: MatrixJson,
}

pub fn kernel(config: &RunConfig, data: &Path, normalized: bool, out: &Path) -> Result<()> {
    let molecules = load_molecules(data)?;
    let graphs = graphs_of(&molecules, &config.radii)?;
    let k = kernel_matrix(&graphs, &config.kernel, normalized)?;
    let output = KernelOutput {
        ids: molecules.into_iter().map(|m| m.id).collect(),
        normalized,
        hyperparameters: config.kernel,
        matrix: MatrixJson::from(&k.values),
    };
    Ok(write_json(out, &output)?)
}

#[derive(Serialize)]
struct TrainOutput {
    n_train: usize,
    kernel: KernelHyperparameters,
    gp: GpHyperparameters,
    normalized: bool,
    fitted_mean: f64,
    signal_variance: f64,
    log_marginal_likelihood: f64,
    train_mae: f64,
    train_rmse: f64,
}

pub fn train(config: &RunConfig, data: &Path, model_path: &Path, out: &Path) -> Result<()> {
    let dataset = load_csv(data)?;
    let graphs = dataset.graphs(&config.radii)?;
    let y = dataset.targets();
    let model = TrainedModel::fit_with(graphs, &y, &config.kernel, &config.gp, config.normalized)?
        .with_source(TrainingSource {
            smiles: dataset.records().iter().map(|r| r.smiles.clone()).collect(),
            radii: config.radii.clone(),
        });
    let fitted = model.predict_mean(&model.graphs)?;
    save_model(&model, model_path)?;
    let output = TrainOutput {
        n_train: model.n_train(),
        kernel: model.kernel,
        gp: model.gp,
        normalized: model.normalized,
        fitted_mean: model.posterior.mean,
        signal_variance: model.posterior.signal,
        log_marginal_likelihood: model.log_marginal_likelihood(),
        train_mae: selection::mae(fitted.as_slice(), &y)?,
        train_rmse: selection::rmse(fitted.as_slice(), &y)?,
    };
    Ok(write_json(out, &output)?)
}

#[derive(Serialize)]
struct PredictionRow {
    id: String,
    mean: f64,
    variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
}

#[derive(Serialize, Default)]
struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    mae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r2: Option<f64>,
}

fn metrics(config: &RunConfig, pred: &[f64], truth: &[f64]) -> Result<Metrics> {
    let wants = |m: &str| config.metrics.iter().any(|x| x == m);
    Ok(Metrics {
        mae: wants("mae").then(|| selection::mae(pred, truth)).transpose()?,
        rmse: wants("rmse").then(|| selection::rmse(pred, truth)).transpose()?,
        // undefined for fewer than two points or constant values
        r2: if wants("r2") { selection::pearson_r2(pred, truth).ok() } else { None },
    })
}

#[derive(Serialize)]
struct CvTest {
    n_test: usize,
    metrics: Metrics,
    predictions: Vec<PredictionRow>,
}

#[derive(Serialize)]
struct CvOutput<'a> {
    n_records: usize,
    n_train: usize,
    train_fraction: f64,
    selected_kernel: KernelHyperparameters,
    selected_gp: GpHyperparameters,
    cv: &'a CvReport,
    test: CvTest,
}

pub fn cv(config: &RunConfig, data: &Path, model_path: &Path, out: &Path) -> Result<()> {
    let dataset = load_csv(data)?;
    let result = evaluate_protocol(&dataset, config.train_fraction, &config.grid, &config.radii)?;
    let best = result.cv.report.selected_candidate;
    let truth = result.test.targets();
    let pred = result.test_prediction.mean.as_slice();
    let predictions = result
        .test
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| PredictionRow {
            id: r.id.clone(),
            mean: pred[i],
            variance: result.test_prediction.variance[i],
            target: Some(r.target),
        })
        .collect();
    let output = CvOutput {
        n_records: dataset.len(),
        n_train: result.train.len(),
        train_fraction: config.train_fraction,
        selected_kernel: config.grid.kernel(&best),
        selected_gp: config.grid.gp(&best),
        cv: &result.cv.report,
        test: CvTest {
            n_test: result.test.len(),
            metrics: metrics(config, pred, &truth)?,
            predictions,
        },
    };
    save_model(&result.model, model_path)?;
    if config.timing_sidecar {
        write_json(crate::sibling(out, "timing.json"), &result.cv.timings)?;
    }
    Ok(write_json(out, &output)?)
}

#[derive(Serialize)]
struct PredictOutput {
    predictions: Vec<PredictionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<Metrics>,
}

pub fn predict(config: &RunConfig, model_path: &Path, data: &Path, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let molecules = load_molecules(data)?;
    let radii = model.source.as_ref().map(|s| s.radii.clone()).unwrap_or_default();
    let graphs = graphs_of(&molecules, &radii)?;
    let p = model.predict(&graphs)?;
    let truth: Option<Vec<f64>> = molecules.iter().map(|m| m.target).collect();
    let metrics = match &truth {
        Some(t) if !t.is_empty() => Some(metrics(config, p.mean.as_slice(), t)?),
        _ => None,
    };
    let predictions = molecules
        .into_iter()
        .enumerate()
        .map(|(i, m)| PredictionRow {
            id: m.id,
            mean: p.mean[i],
            variance: p.variance[i],
            target: m.target,
        })
        .collect();
    Ok(write_json(out, &PredictOutput { predictions, metrics })?)
}

pub fn bertz(config: &RunConfig, data: &Path, out: &Path) -> Result<()> {
    let molecules = load_molecules(data)?;
    let graphs = graphs_of(&molecules, &config.radii)?;
    let report = analysis::bertz_report(&graphs, Binning::Width(config.bertz_bin_width))?;
    Ok(write_json(out, &report)?)
}

pub fn distance(config: &RunConfig, model_path: &Path, data: &Path, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let molecules = load_molecules(data)?;
    let radii = model.source.as_ref().map(|s| s.radii.clone()).unwrap_or_default();
    let graphs = graphs_of(&molecules, &radii)?;
    let report = analysis::distance_diagnostics_with_bins(&model.graphs, &graphs, &model.kernel, config.distance_bins)?;
    Ok(write_json(out, &report)?)
}

#[derive(Serialize)]
struct EmbedOutput {
    mode: EmbedMode,
    ids: Vec<String>,
    #[serde(flatten)]
    result: analysis::EmbeddingResult,
}

pub fn embed(mode: EmbedMode, model_path: &Path, dmax: usize, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    // the embedding is anchored at the first point, so fix the order by id
    let mut order: Vec<usize> = (0..model.n_train()).collect();
    order.sort_by(|&a, &b| model.graphs[a].id.as_bytes().cmp(model.graphs[b].id.as_bytes()));
    let c = model.covariance()?.select_rows(&order).select_columns(&order);
    let result = analysis::embed_mds(&c, dmax, mode)?;
    let output = EmbedOutput {
        mode,
        ids: order.iter().map(|&i| model.graphs[i].id.clone()).collect(),
        result,
    };
    Ok(write_json(out, &output)?)
}
