use immsnap::topology::{self, Provenance};
use immsnap::{Complex, RoundCounter};

fn counters(max_procs: usize, max_rounds: u32) -> Vec<RoundCounter> {
    let mut out = Vec::new();
    for n in 1..=max_procs {
        let mut counts = vec![0u32; n];
        loop {
            out.push(RoundCounter::from_slice(&counts));
            let mut i = 0;
            while i < n && counts[i] == max_rounds {
                counts[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            counts[i] += 1;
        }
    }
    out
}

#[test]
fn engine_collapses_without_fallback() {
    for r in counters(3, 2).into_iter().chain(["1,1,1,1", "1,0,1,1", "2,1,1,0"].map(|s| s.parse().unwrap())) {
        let k = Complex::build(&r).unwrap();
        for p in r.support() {
            let rel = topology::collapse_to_relative_boundary(&k, p).unwrap();
            assert_eq!(rel.count(Provenance::GreedyFallback), 0, "{r}, p={p}");
            let full = topology::collapse_all(&k, p).unwrap();
            assert_eq!(full.count(Provenance::GreedyFallback), 0, "{r}, p={p}");
            assert!(topology::validate_collapse(&k, &full.steps, None).valid, "{r}, p={p}");
            assert_eq!(2 * full.len(), k.len());
        }
    }
}

#[test]
fn relative_remainder_is_acyclic() {
    for text in ["1,1", "1,1,1", "2,1,1", "1,0,1"] {
        let r: RoundCounter = text.parse().unwrap();
        let k = Complex::build(&r).unwrap();
        for p in r.support() {
            let rest = topology::relative_boundary(&k, p);
            assert!(topology::homology_z2(&k, Some(&rest)).is_acyclic(), "{text}, p={p}");
        }
    }
}

#[test]
fn greedy_agrees_on_collapsibility() {
    for text in ["1,1", "2,1", "1,1,1", "2,2", "1,0,1"] {
        let k = Complex::build(&text.parse().unwrap()).unwrap();
        let seq = topology::greedy_collapse(&k).unwrap();
        assert!(topology::validate_collapse(&k, &seq.steps, None).valid, "{text}");
    }
}
