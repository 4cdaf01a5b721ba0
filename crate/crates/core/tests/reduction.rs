// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use qexpander::channel::pinch;
use qexpander::circuit;
use qexpander::io;
use qexpander::linalg::{self, CMatrix, CVector, ONE};
use qexpander::reduction::{self, ControlPattern, TargetPlacement};
use qexpander::{rng, Operator, RegisterLayout};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn basis(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = ONE;
    v
}

#[test]
fn corpus_circuits_are_canonical() {
    let dir = corpus("circuits");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed = circuit::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(circuit::serialize(&parsed), text, "{} is not canonical", path.display());
        parsed.check_unitary().unwrap();
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn corpus_verifiers_have_expected_acceptance() {
    let cases = [
        ("toy_yes_1x1.json", 1, 1, 1.0),
        ("toy_yes_2x2.json", 2, 2, 1.0),
        ("toy_no_2x2.json", 2, 2, 0.0),
        ("noisy_yes_2x2.json", 2, 2, 0.995),
        ("noisy_no_2x2.json", 2, 2, 0.005),
    ];
    for (file, n_w, n_a, expected) in cases {
        let v = io::load_circuit(&corpus(&format!("circuits/{file}"))).unwrap();
        let layout = RegisterLayout::new(n_w, n_a).unwrap();
        let p = reduction::max_acceptance(&v, &layout).unwrap();
        assert!((p - expected).abs() < 1e-9, "{file}: {p}");
    }
}

#[test]
fn toy_yes_1x1_checks_the_witness_bit() {
    let u = io::load_circuit(&corpus("circuits/toy_yes_1x1.json")).unwrap().simulate_unitary().unwrap();
    // |w a>: witness 1 with ancilla 0 stays put and reads 1 on top.
    let out = u.matrix().dot(&basis(4, 0b10));
    assert!(linalg::vector_norm(&(&out - &basis(4, 0b10))) < 1e-12);
    let out = u.matrix().dot(&basis(4, 0b00));
    assert!(linalg::vector_norm(&(&out - &basis(4, 0b00))) < 1e-12);
}

#[test]
fn toy_verifiers_match_builders() {
    let built = reduction::toy_yes_verifier(2, 2).unwrap();
    let filed = io::load_circuit(&corpus("circuits/toy_yes_2x2.json")).unwrap();
    assert_eq!(built, filed);
    let built = reduction::toy_no_verifier(2, 2).unwrap();
    let filed = io::load_circuit(&corpus("circuits/toy_no_2x2.json")).unwrap();
    assert_eq!(built, filed);
}

#[test]
fn ancilla_pattern_is_complement_of_all_zero() {
    let layout = RegisterLayout::new(2, 2).unwrap();
    let nv = layout.verifier_qubits();
    let ancillas: Vec<usize> = layout.ancilla().collect();
    let any = ControlPattern::AnyOne(ancillas.clone()).projector(nv).unwrap();
    let zero = ControlPattern::Match {
        qubits: ancillas.clone(),
        bits: vec![false; ancillas.len()],
    }
    .projector(nv)
    .unwrap();
    assert_eq!(any + &zero, linalg::identity(1 << nv));
    let ch = reduction::controlled_depolarizer(ControlPattern::AnyOne(ancillas), nv, TargetPlacement::After).unwrap();
    assert_eq!(ch.realized().kraus_count(), 8);
    assert!(ch.zero_sum_defect() < 1e-12);
}

#[test]
fn controlled_pattern_rejects_overlap() {
    let err = ControlPattern::qubit_is(3, true).projector(2).unwrap_err();
    assert!(err.to_string().contains("control qubit 3 overlaps the target"));
}

#[test]
fn double_verifier_pinches_identity_block() {
    let mut rng = rng::stream(3, &[1]);
    let layout = RegisterLayout::new(1, 1).unwrap();
    let nv = layout.verifier_qubits();
    let n = 1 << nv;
    let verifier = reduction::noisy_verifier(&reduction::toy_yes_verifier(1, 1).unwrap(), 0.3).unwrap();
    let ancillas: Vec<usize> = layout.ancilla().collect();
    let anc = reduction::controlled_depolarizer(ControlPattern::AnyOne(ancillas), nv, TargetPlacement::After).unwrap();
    let wit = reduction::controlled_depolarizer(
        ControlPattern::Conjugated {
            inner: Box::new(ControlPattern::qubit_is(layout.top(), false)),
            circuit: verifier,
        },
        nv,
        TargetPlacement::After,
    )
    .unwrap();
    let both = wit.realized().compose(anc.realized()).unwrap();
    let (pa, qa) = (anc.projector().clone(), anc.complement());
    let (pw, qw) = (wit.projector().clone(), wit.complement());
    let q: CMatrix = qw.dot(&qa);
    for _ in 0..20 {
        let blocks: Vec<Operator> = (0..4).map(|_| Operator::random(n, &mut rng)).collect();
        let sigma = |i: usize| Operator::new(linalg::pauli(i)).unwrap();
        let mut input = Operator::zeros(2 * n);
        for (i, a) in blocks.iter().enumerate() {
            input = &input + &a.tensor(&sigma(i));
        }
        let direct = both.apply(&input).unwrap();

        let c = pinch(&pinch(&blocks[0], &[pa.clone(), qa.clone()]).unwrap(), &[pw.clone(), qw.clone()]).unwrap();
        let mut expected = c.tensor(&sigma(0));
        for (i, a) in blocks.iter().enumerate().skip(1) {
            let qaq = Operator::new(q.dot(a.matrix()).dot(&linalg::dagger(&q))).unwrap();
            expected = &expected + &qaq.tensor(&sigma(i));
        }
        assert!((&direct - &expected).frobenius() < 1e-10);
        assert!((c.trace() - blocks[0].trace()).norm() < 1e-10);
        assert!(c.frobenius() <= blocks[0].frobenius() + 1e-10);
    }
}

#[test]
fn spec_files_reduce_with_expected_bounds() {
    let no = io::load_reduction_spec(&corpus("specs/toy_no.json")).unwrap();
    let red = reduction::build_reduction(&no).unwrap();
    assert_eq!(red.channel.kraus_count(), 64 * red.base_degree());
    assert_eq!(red.channel.qubits(), 5);
    let mut rng = rng::stream(5, &[2]);
    for _ in 0..200 {
        let a = Operator::random_traceless(32, &mut rng);
        let out = red.channel.apply(&a).unwrap();
        assert!(out.frobenius() <= red.beta * a.frobenius() + 1e-10);
    }

    let yes = io::load_reduction_spec(&corpus("specs/toy_yes.json")).unwrap();
    let red = reduction::build_reduction(&yes).unwrap();
    let mut psi = CVector::zeros(4);
    psi[3] = ONE;
    let a = reduction::yes_witness(&red.layout, &psi).unwrap();
    let out = red.channel.apply(&a).unwrap();
    assert!(out.frobenius() >= red.alpha * a.frobenius() - 1e-10);
}

#[test]
fn strict_mode_is_enforced_and_relaxable() {
    let mut spec = io::load_reduction_spec(&corpus("specs/noisy_no.json")).unwrap();
    spec.validate().unwrap();
    spec.a = 0.98;
    assert!(spec.validate().is_err());
    spec.strict = false;
    spec.validate().unwrap();
    // alpha > beta is checked even when relaxed.
    spec.a = 0.5;
    assert!(spec.validate().is_err());
}

#[test]
fn synthesis_certifies_four_qubit_expander() {
    let base = reduction::build_base_expander(4, 0.1, 4, 7).unwrap();
    assert!(base.kappa <= 0.1, "kappa = {}", base.kappa);
    assert_eq!(base.channel.qubits(), 4);
    assert_eq!(base.channel.kraus_count(), 4u128.pow(base.power as u32));
    let again = reduction::build_base_expander(4, 0.1, 4, 7).unwrap();
    assert_eq!(again.kappa, base.kappa);
}
