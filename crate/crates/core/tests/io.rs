mod common;

use common::{data_path, freesolv};
use molgp::gpr::TrainingSource;
use molgp::io::{
    load_csv, load_model, load_molecules, model_from_str, model_to_string, read_csv, save_model, to_json_string,
    IoError, MatrixJson, RunConfig, FORMAT_VERSION,
};
use molgp::selection::split_by_id;
use molgp::{GpHyperparameters, KernelHyperparameters, MeanMode, RadiiTable, TrainedModel};
use nalgebra::DMatrix;

fn small_model(n: usize, mean: MeanMode) -> (TrainedModel, molgp::Dataset) {
    let data = freesolv();
    let (train, rest) = split_by_id(&data, n as f64 / data.len() as f64).unwrap();
    let radii = RadiiTable::default();
    let model = TrainedModel::fit(
        train.graphs(&radii).unwrap(),
        &train.targets(),
        &KernelHyperparameters::default(),
        &GpHyperparameters::new(4.0, 1e-2, mean),
    )
    .unwrap()
    .with_source(TrainingSource {
        smiles: train.records().iter().map(|r| r.smiles.clone()).collect(),
        radii,
    });
    (model, rest)
}

#[test]
fn model_round_trip_reproduces_predictions() {
    for mean in [MeanMode::Centered, MeanMode::Constant] {
        let (model, rest) = small_model(30, mean);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        let test = &rest.graphs(&RadiiTable::default()).unwrap()[..10];
        for graphs in [&model.graphs[..], test] {
            let a = model.predict(graphs).unwrap();
            let b = back.predict(graphs).unwrap();
            assert!((&a.mean - &b.mean).amax() <= 1e-12);
            assert!((&a.variance - &b.variance).amax() <= 1e-12);
        }
        // second save is byte-identical
        assert_eq!(model_to_string(&back).unwrap(), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn two_molecule_model() {
    let data = read_csv("id,smiles,target\na,CCO,-5.0\nb,CC,1.8\n".as_bytes(), "tiny").unwrap();
    let radii = RadiiTable::default();
    let model = TrainedModel::fit(data.graphs(&radii).unwrap(), &data.targets(), &KernelHyperparameters::default(), &GpHyperparameters::default())
        .unwrap()
        .with_source(TrainingSource {
            smiles: data.records().iter().map(|r| r.smiles.clone()).collect(),
            radii,
        });
    let s = model_to_string(&model).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["format_version"], FORMAT_VERSION);
    assert_eq!(v["cholesky"].as_array().unwrap().len(), 3);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    let back = model_from_str(&s).unwrap();
    assert_eq!(back.n_train(), 2);
}

#[test]
fn rejects_damaged_model_files() {
    let (model, _) = small_model(8, MeanMode::Centered);
    let s = model_to_string(&model).unwrap();
    assert!(matches!(model_from_str(&s[..s.len() / 2]), Err(IoError::CorruptModel(_))));

    let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
    v["format_version"] = serde_json::json!(FORMAT_VERSION + 1);
    assert!(matches!(
        model_from_str(&v.to_string()),
        Err(IoError::VersionMismatch { found, .. }) if found == FORMAT_VERSION + 1
    ));

    let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
    v["cholesky"][0] = serde_json::json!(123.0);
    assert!(matches!(model_from_str(&v.to_string()), Err(IoError::CorruptModel(_))));

    let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
    v["weights"].as_array_mut().unwrap().pop();
    assert!(matches!(model_from_str(&v.to_string()), Err(IoError::CorruptModel(_))));

    let bare = TrainedModel::fit(model.graphs.clone(), model.targets(), &model.kernel, &model.gp).unwrap();
    assert!(matches!(model_to_string(&bare), Err(IoError::MissingSource)));
}

#[test]
fn csv_errors() {
    let bad = [
        ("id,smiles\na,C\n", "MissingColumn"),
        ("id,smiles,target\na,C,1\na,CC,2\n", "DuplicateId"),
        ("id,smiles,target\na,C,abc\n", "UnparsableTarget"),
    ];
    for (text, code) in bad {
        let err = read_csv(text.as_bytes(), "t").unwrap_err();
        assert_eq!(err.code(), code, "{text:?}");
    }
    assert!(matches!(load_csv("/nonexistent/x.csv"), Err(IoError::Read { .. })));
    let data = freesolv();
    assert_eq!(data.len(), 580);
    let mols = load_molecules(data_path("freesolv.csv")).unwrap();
    assert_eq!(mols.len(), 580);
    assert!(mols.iter().all(|m| m.target.is_some()));
}

#[test]
fn config_parsing() {
    let c = RunConfig::from_json("{}").unwrap();
    assert_eq!(c, RunConfig::default());
    assert_eq!(c.grid.len(), 324);
    let c = RunConfig::from_json(r#"{"train_fraction": 0.5, "kernel": {"nu": 0.2, "lambda": 0.1, "zeta": 1.0, "q": 0.1}}"#).unwrap();
    assert_eq!(c.train_fraction, 0.5);
    assert_eq!(c.kernel.nu, 0.2);
    assert!(matches!(RunConfig::from_json(r#"{"bogus": 1}"#), Err(IoError::InvalidConfig(_) | IoError::Json(_))));
    assert!(RunConfig::from_json(r#"{"train_fraction": 1.5}"#).is_err());
    assert!(RunConfig::from_json(r#"{"grid": {"nu": []}}"#).is_err());
}

#[test]
fn json_floats_round_trip_exactly() {
    let m = DMatrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, f64::MIN_POSITIVE, -2.5e300]);
    let s = to_json_string(&MatrixJson::from(&m)).unwrap();
    let back: MatrixJson = serde_json::from_str(&s).unwrap();
    assert_eq!(back.to_matrix().unwrap(), m);
}
