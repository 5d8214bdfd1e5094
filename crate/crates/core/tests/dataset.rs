mod common;

use common::{rel, rng};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use wehrl_core::dataset::*;
use wehrl_core::gme::max_gme_check;
use wehrl_core::metrics::{evaluate_method, EXCLUSION_THRESHOLD};
use wehrl_core::*;

fn two_sample_chi2_p(a: &[f64], b: &[f64], bins: usize, hi: f64) -> f64 {
    let hist = |xs: &[f64]| {
        let mut h = vec![0.0; bins];
        for &x in xs {
            h[((x / hi * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        h
    };
    let (ha, hb) = (hist(a), hist(b));
    let (mut stat, mut used) = (0.0, 0);
    for (x, y) in ha.iter().zip(&hb) {
        if x + y > 0.0 {
            stat += (x - y) * (x - y) / (x + y);
            used += 1;
        }
    }
    1.0 - ChiSquared::new((used - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn partition_sampler_is_uniform() {
    let parts = partitions(4);
    let mut r = rng(31);
    let mut counts = vec![0usize; parts.len()];
    for _ in 0..10_000 {
        let p = sample_partition(&parts, &mut r);
        counts[parts.iter().position(|q| q.as_slice() == p).unwrap()] += 1;
    }
    for c in counts {
        assert!((c as f64 / 1e4 - 0.2).abs() < 0.02, "{c}");
    }
}

#[test]
fn records_satisfy_invariants() {
    let b = DatasetBuilder::new(4, DEFAULT_Q_MAX, 32);
    let mut records = b.main_subsets(60).unwrap();
    records.extend(b.squeezed(100, 50, DEFAULT_SQUEEZE_DT, 1000).unwrap());
    for r in &records {
        r.moments.check_invariants(Some(r.gme)).unwrap();
        assert!(max_gme_check(4, r.gme));
        r.verify(1e-9).unwrap();
        for q in 1..=DEFAULT_Q_MAX {
            assert!(r.moments.moment(q) <= 1.0 / (4 * q + 1) as f64 * (1.0 + 1e-12));
        }
        if let Some(alpha) = r.params.alpha {
            assert!((0.0..=1.0).contains(&alpha) && r.params.k.unwrap() <= 4);
        }
    }
    let ids: std::collections::BTreeSet<u64> = records.iter().map(|r| r.id).collect();
    assert_eq!(ids.len(), records.len());
}

#[test]
fn ghz_dicke_half_superposition() {
    let s = ghz_dicke_state(4, 0.5, 2).unwrap();
    let d = s.dicke();
    assert!(d[1].norm() == 0.0 && d[3].norm() == 0.0);
    assert!(d[0].norm() > 0.0 && d[2].norm() > 0.0 && d[4].norm() > 0.0);
    let a = moments_dicke(&s, 6).unwrap();
    let b = moments_quadrature(&s, 6).unwrap();
    for q in 1..=6 {
        assert!(rel(a.moment(q), b.moment(q)) < 1e-10);
    }
}

#[test]
fn squeezing_long_trajectory_stays_normalized() {
    let amps = squeezing_trajectory(6, [0.3, 0.7, 0.2], 500, 0.1).unwrap();
    for a in amps {
        let norm: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }
}

#[test]
fn split_is_balanced_and_disjoint() {
    let b = DatasetBuilder::new(4, 4, 33);
    let records = b.main_subsets(300).unwrap();
    let (train, test) = split_dataset(&records, 33).unwrap();
    assert_eq!(train.len(), 450);
    assert_eq!(test.len(), 450);
    for subset in [Subset::Uniform, Subset::Degenerate, Subset::GhzDicke] {
        assert_eq!(train.iter().filter(|r| r.subset == subset).count(), 150);
    }
    let mut ids: Vec<u64> = train.iter().chain(&test).map(|r| r.id).collect();
    ids.sort();
    assert_eq!(ids, (0..900).collect::<Vec<u64>>());

    let gt: Vec<f64> = train.iter().map(|r| r.gme).collect();
    let gs: Vec<f64> = test.iter().map(|r| r.gme).collect();
    let p = two_sample_chi2_p(&gt, &gs, 10, 0.8);
    assert!(p > 0.01, "p = {p}");

    let (again, _) = split_dataset(&records, 33).unwrap();
    assert_eq!(again, train);
}

#[test]
fn exclusions_are_the_coherent_records() {
    let b = DatasetBuilder::new(4, 4, 34);
    let records = b.main_subsets(200).unwrap();
    let report = evaluate_method(&records, Method::Ratio, 4, None, false).unwrap();
    // single-part partitions are coherent; a close pair of points can also
    // land below the threshold
    let coherent: Vec<&DatasetRecord> = records
        .iter()
        .filter(|r| r.params.partition.as_deref() == Some(&[4][..]))
        .collect();
    let excluded: Vec<&DatasetRecord> = records.iter().filter(|r| r.gme < EXCLUSION_THRESHOLD).collect();
    assert_eq!(report.n_excluded, excluded.len());
    assert!(coherent.iter().all(|r| r.gme < 1e-9));
    assert!(excluded.len() >= coherent.len() && excluded.len() <= coherent.len() + 2);
    assert!(excluded.iter().all(|r| r.subset == Subset::Degenerate));
}

#[test]
fn files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str| {
        let records = DatasetBuilder::new(3, 5, 35).main_subsets(10).unwrap();
        let path = dir.path().join(name);
        write_jsonl(&path, &records).unwrap();
        std::fs::read(path).unwrap()
    };
    let a = write("a.jsonl");
    let b = write("b.jsonl");
    assert_eq!(a, b);

    let back = read_jsonl(&dir.path().join("a.jsonl")).unwrap();
    assert_eq!(back, DatasetBuilder::new(3, 5, 35).main_subsets(10).unwrap());
}

#[test]
fn manifest_round_trip_and_version_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    let m = Manifest {
        schema_version: SCHEMA_VERSION,
        generator_version: "test".into(),
        seed: 3,
        n_qubits: 4,
        q_max: 8,
        sizes: [("uniform".to_string(), 10)].into_iter().collect(),
        files: [("train".to_string(), "train.jsonl".to_string())].into_iter().collect(),
    };
    m.write(&path).unwrap();
    assert_eq!(Manifest::read(&path).unwrap(), m);

    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace(&format!("\"schema_version\": {SCHEMA_VERSION}"), "\"schema_version\": 999");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(Manifest::read(&path), Err(Error::Schema(_))));
}
