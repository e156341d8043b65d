use c4bench_core::circuit::{compile_encoded, compile_unencoded, Basis, NativeCircuit};
use c4bench_core::code::{decode_table, ft_check, physical_table, CodeLayout};
use c4bench_core::gottesman::{ideal_distribution, load_corpus};
use c4bench_core::sim::exact_distribution;

fn max_diff(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn noiseless_corpus_decodes_to_ideal() {
    for entry in load_corpus() {
        let lc = entry.logical();
        let ideal = ideal_distribution(&entry);

        let enc = compile_encoded(&lc);
        let dec = decode_table(&exact_distribution(&enc, None).unwrap(), &CodeLayout::for_prep(entry.prep), Basis::Z);
        assert!((dec.retained() - 1.0).abs() < 1e-12, "#{} retained {}", entry.index, dec.retained());
        assert!(max_diff(&dec.normalized().unwrap(), &ideal) < 1e-10, "#{} encoded", entry.index);

        let phys = physical_table(&exact_distribution(&compile_unencoded(&lc), None).unwrap());
        assert!(max_diff(&phys.normalized().unwrap(), &ideal) < 1e-10, "#{} physical", entry.index);
    }
}

#[test]
fn compiled_text_round_trips() {
    for entry in load_corpus().iter().step_by(7) {
        for basis in [Basis::Z, Basis::X] {
            let c = compile_encoded(&entry.logical().in_basis(basis));
            let back = NativeCircuit::from_text(&c.to_text()).unwrap();
            assert_eq!(back.to_text(), c.to_text());
            assert_eq!(back.count_cz(), c.count_cz());
        }
    }
}

#[test]
fn corpus_circuits_tolerate_single_faults() {
    for entry in load_corpus().iter().step_by(11) {
        let report = ft_check(&entry.logical());
        assert!(report.passed(), "#{}: {report:?}", entry.index);
    }
}
