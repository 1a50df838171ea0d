use std::fs;

use dlc::data::{load_dataset, read_csv, read_idx_pair, write_csv, write_idx_pair, Source};
use dlc::{checkpoint, config, metrics, table, Error};
use dlc_core::analysis::{Method, TautologySuite};
use dlc_core::train::{blobs, BlobSpec, ConstraintKind, EpochRecord, MetricsHistory, Model, TrainConfig};
use dlc_core::{LogicConfig, LogicKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

#[test]
fn idx_pair_round_trip() {
    let dir = tempdir().unwrap();
    let (images, labels) = (dir.path().join("img"), dir.path().join("lab"));
    let pixels = [0u8, 255, 51, 102, 0, 0, 0, 255];
    write_idx_pair(&images, &labels, 2, 2, &pixels, &[1, 0]).unwrap();
    let bytes = fs::read(&images).unwrap();
    assert_eq!(&bytes[..16], &[0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2]);
    let t = read_idx_pair(&images, &labels).unwrap();
    assert_eq!(t.labels, vec![1, 0]);
    assert_eq!(t.rows, vec![vec![0.0, 1.0, 0.2, 0.4], vec![0.0, 0.0, 0.0, 1.0]]);
}

#[test]
fn idx_errors() {
    let dir = tempdir().unwrap();
    let (images, labels) = (dir.path().join("img"), dir.path().join("lab"));
    write_idx_pair(&images, &labels, 1, 1, &[7, 8], &[0, 1]).unwrap();
    // swapped files have the wrong magic
    assert!(matches!(read_idx_pair(&labels, &images), Err(Error::Format { .. })));
    let mut bytes = fs::read(&images).unwrap();
    bytes.pop();
    fs::write(&images, &bytes).unwrap();
    assert!(matches!(read_idx_pair(&images, &labels), Err(Error::Format { .. })));
    write_idx_pair(&images, &labels, 1, 1, &[7, 8], &[0, 1]).unwrap();
    write_idx_pair(&dir.path().join("other"), &labels, 1, 1, &[7], &[0]).unwrap();
    let err = read_idx_pair(&images, &labels).unwrap_err().to_string();
    assert!(err.contains("1 labels for 2 images"), "{err}");
}

#[test]
fn csv_parsing() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("d.csv");
    fs::write(&p, "label,f0,f1\n2,0.5,0.25\n0, 1 ,0\n").unwrap();
    let t = read_csv(&p).unwrap();
    assert_eq!(t.labels, vec![2, 0]);
    assert_eq!(t.rows, vec![vec![0.5, 0.25], vec![1.0, 0.0]]);
    for bad in ["f0,label\n0,1\n", "label,f1\n0,1\n", "label\n0\n", "label,f0\nx,0.1\n", "label,f0\n0,nan\n", "label,f0\n0,0.1,0.2\n"] {
        fs::write(&p, bad).unwrap();
        assert!(matches!(read_csv(&p), Err(Error::Format { .. })), "{bad:?}");
    }
    assert!(matches!(read_csv(&dir.path().join("missing.csv")), Err(Error::Format { .. } | Error::Io { .. })));
}

#[test]
fn csv_scaling_fitted_on_training_set() {
    let dir = tempdir().unwrap();
    let (train, test) = (dir.path().join("train.csv"), dir.path().join("test.csv"));
    fs::write(&train, "label,f0\n0,10\n1,20\n1,15\n").unwrap();
    fs::write(&test, "label,f0\n0,25\n1,12.5\n").unwrap();
    let (tr, te) = load_dataset(&Source::Csv { train, test }, None).unwrap();
    assert_eq!(tr.inputs.data(), &[0.0, 1.0, 0.5]);
    assert_eq!(te.inputs.data(), &[1.0, 0.25]);
    assert_eq!((tr.classes, te.classes), (2, 2));
}

#[test]
fn dataset_class_count() {
    let dir = tempdir().unwrap();
    let (train, test) = (dir.path().join("train.csv"), dir.path().join("test.csv"));
    fs::write(&train, "label,f0\n0,0.1\n3,0.2\n").unwrap();
    fs::write(&test, "label,f0\n1,0.3\n").unwrap();
    let source = Source::Csv { train: train.clone(), test: test.clone() };
    assert_eq!(load_dataset(&source, None).unwrap().0.classes, 4);
    assert_eq!(load_dataset(&source, Some(6)).unwrap().1.classes, 6);
    assert!(matches!(load_dataset(&source, Some(3)), Err(Error::Invalid(_))));
    fs::write(&test, "label,f0,f1\n1,0.3,0.1\n").unwrap();
    assert!(load_dataset(&source, None).is_err());
}

#[test]
fn csv_write_read_round_trip() {
    let spec = BlobSpec { train_per_class: 5, test_per_class: 2, ..BlobSpec::default() };
    let (train, test) = blobs(&spec).unwrap();
    let dir = tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_csv(&a, &train).unwrap();
    write_csv(&b, &test).unwrap();
    let (tr, te) = load_dataset(&Source::Csv { train: a, test: b }, Some(3)).unwrap();
    assert_eq!(tr, train);
    assert_eq!(te, test);
}

#[test]
fn checkpoint_round_trip() {
    let model = Model::new(&[3, 5, 4, 2], &mut ChaCha8Rng::seed_from_u64(4));
    let bytes = checkpoint::encode(&model);
    assert_eq!(&bytes[..4], b"DLCM");
    assert_eq!(bytes.len(), 8 + 4 * 4 + 8 * model.parameter_count());
    let back = checkpoint::decode(&bytes).unwrap();
    assert_eq!(back, model);
    assert_eq!(checkpoint::layer_sizes(&back), vec![3, 5, 4, 2]);
    assert!(checkpoint::decode(&bytes[..bytes.len() - 1]).is_err());
    assert!(checkpoint::decode(b"DLCX").is_err());
    let dir = tempdir().unwrap();
    let p = dir.path().join("m.bin");
    checkpoint::save(&p, &model).unwrap();
    assert_eq!(checkpoint::load(&p).unwrap(), model);
}

fn history(values: &[(f64, f64)]) -> MetricsHistory {
    MetricsHistory {
        records: values
            .iter()
            .enumerate()
            .map(|(epoch, &(a, b))| EpochRecord {
                epoch,
                pred_acc: a,
                constraint_acc: b,
                lambda_ce: 2.0 - b,
                lambda_c: b,
                loss_ce: a * 1e-7,
                loss_c: b / 3.0,
                seconds: 0.0,
            })
            .collect(),
    }
}

proptest! {
    #[test]
    fn metrics_records_round_trip(values in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 0..20)) {
        let h = history(&values);
        prop_assert_eq!(metrics::parse_records(&metrics::to_records(&h)).unwrap(), h);
    }
}

#[test]
fn metrics_formats() {
    let h = history(&[(0.5, 0.25)]);
    assert_eq!(metrics::to_csv(&h), format!("{}\n0,0.5,0.25,1.75,0.25,0.00000005,0.08333333333333333\n", metrics::FIELDS.join(",")));
    assert!(metrics::to_records(&h).starts_with("epoch=0 pred_acc=0.5 constraint_acc=0.25 "));
    assert_eq!(metrics::to_text(&h).lines().count(), 2);
    assert!(metrics::parse_records("epoch=0 pred_acc=x").is_err());
}

#[test]
fn config_files() {
    let p = std::path::Path::new("run.toml");
    let cfg = config::parse(
        "epochs = 3\nhidden = [8, 4]\n[logic]\nkind = \"goguen\"\n[constraint]\nkind = \"groups\"\ngroups = [[0], [1, 2]]\n[gradnorm]\nalpha = 0.5\n",
        p,
    )
    .unwrap();
    assert_eq!(cfg.epochs, 3);
    assert_eq!(cfg.hidden, vec![8, 4]);
    assert_eq!(cfg.logic.kind, LogicKind::Goguen);
    assert_eq!(cfg.constraint.kind, ConstraintKind::Groups);
    assert_eq!(cfg.gradnorm.alpha, 0.5);
    assert_eq!(cfg.batch_size, TrainConfig::default().batch_size);
    assert_eq!(config::parse(&config::to_toml(&cfg), p).unwrap(), cfg);
    assert_eq!(config::parse(&config::to_toml(&TrainConfig::default()), p).unwrap(), TrainConfig::default());
    assert!(matches!(config::parse("epochz = 3", p), Err(Error::Config { .. })));
}

#[test]
fn parallel_table_matches_sequential() {
    let logics: Vec<LogicConfig> = [LogicKind::Godel, LogicKind::Reichenbach, LogicKind::Yager].map(LogicConfig::new).to_vec();
    let suite = TautologySuite { entries: TautologySuite::reference().entries[..6].to_vec() };
    let method = Method::MonteCarlo { seed: 3 };
    let seq = dlc_core::analysis::consistency_table(&logics, &suite, method, 5000).unwrap();
    for workers in [1, 4, 64] {
        assert_eq!(table::consistency_table(&logics, &suite, method, 5000, workers).unwrap(), seq);
    }
    let csv = table::values_csv(&seq, &suite);
    assert_eq!(csv.lines().count(), 1 + 6 + 1);
    assert!(csv.starts_with("group,tautology,Gödel,Reichenbach,Yager\n"));
    assert!(matches!(table::consistency_table(&logics, &suite, method, 10, 4), Err(Error::Analysis(_))));
}
