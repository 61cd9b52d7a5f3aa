use num_rational::Ratio;
use proptest::prelude::*;
use qsurgery::config::Caps;
use qsurgery::graphkit::{
    cellulate, decongest, fundamental_cycle_basis, greedy_partition, relative_cheeger_exact, thicken, Beta, CycleBasis,
    MultiGraph,
};
use qsurgery::paulicode::{fixtures, ldpc_profile, logical_basis, PauliOperator, StabilizerCode};
use qsurgery::surgery::{build_measurement_graph, build_merged_code};

/// Random tree plus extra edges; parallel edges allowed.
fn connected_graph(max_v: usize, max_extra: usize) -> impl Strategy<Value = MultiGraph> {
    (2..=max_v).prop_flat_map(move |n| {
        (
            prop::collection::vec(any::<prop::sample::Index>(), n - 1),
            prop::collection::vec((0..n, 0..n), 0..=max_extra),
        )
            .prop_map(move |(parents, extra)| {
                let mut g = MultiGraph::new(n);
                for (v, p) in parents.iter().enumerate() {
                    g.add_edge(p.index(v + 1), v + 1);
                }
                for (a, b) in extra {
                    if a != b {
                        g.add_edge(a, b);
                    }
                }
                g
            })
    })
}

fn check_basis(g: &MultiGraph, b: &CycleBasis) -> Result<(), TestCaseError> {
    let m = g.incidence();
    for c in &b.cycles {
        prop_assert!(m.mul_vec(&g.edge_vector(c)).is_zero(), "cycle {:?} has odd vertices", c);
    }
    prop_assert_eq!(b.cycles.len(), g.num_edges() + g.components().1 - g.num_vertices());
    let mut load = vec![0usize; g.num_edges()];
    for c in &b.cycles {
        for &e in c {
            load[e] += 1;
        }
    }
    prop_assert_eq!(b.rho, load.into_iter().max().unwrap_or(0));
    Ok(())
}

fn min1(r: Beta, levels: u64) -> Ratio<u64> {
    match r {
        Beta::Infinite => Ratio::from_integer(1),
        Beta::Finite(b) => (b * levels).min(Ratio::from_integer(1)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decongested_basis_spans_cycle_space(g in connected_graph(16, 24), seed in any::<u64>()) {
        let b = decongest(&g, seed).unwrap();
        check_basis(&g, &b)?;
        b.validate(&g).unwrap();
    }

    #[test]
    fn fundamental_basis_spans_cycle_space(g in connected_graph(16, 24)) {
        check_basis(&g, &fundamental_cycle_basis(&g))?;
    }

    #[test]
    fn greedy_parts_are_edge_disjoint(g in connected_graph(14, 20), seed in any::<u64>()) {
        for b in [fundamental_cycle_basis(&g), decongest(&g, seed).unwrap()] {
            let p = greedy_partition(&b);
            prop_assert_eq!(p.parts.iter().map(Vec::len).sum::<usize>(), b.cycles.len());
            for part in &p.parts {
                let mut seen = vec![false; g.num_edges()];
                for &i in part {
                    for &e in &b.cycles[i] {
                        prop_assert!(!seen[e]);
                        seen[e] = true;
                    }
                }
            }
        }
    }

    #[test]
    fn cellulation_triangles_sum_to_the_cycle(w in 3usize..12, chords in prop::collection::vec((0usize..12, 0usize..12), 0..4)) {
        let mut g = MultiGraph::new(w);
        let cycle: Vec<usize> = (0..w).map(|i| g.add_edge(i, (i + 1) % w)).collect();
        for (a, b) in chords {
            if a % w != b % w {
                g.add_edge(a % w, b % w);
            }
        }
        let cell = cellulate(&mut g, &cycle).unwrap();
        prop_assert_eq!(cell.triangles.len(), w - 2);
        let mut sum = vec![false; g.num_edges()];
        for t in &cell.triangles {
            let (a, b, c) = (g.edge(t[0]), g.edge(t[1]), g.edge(t[2]));
            let mut ends = vec![a.0, a.1, b.0, b.1, c.0, c.1];
            ends.sort_unstable();
            prop_assert!(ends[0] == ends[1] && ends[2] == ends[3] && ends[4] == ends[5]);
            for &e in t {
                sum[e] ^= true;
            }
        }
        let expected: Vec<bool> = (0..g.num_edges()).map(|e| cycle.contains(&e)).collect();
        prop_assert_eq!(sum, expected);
    }

    #[test]
    fn thickening_keeps_relative_expansion(g in connected_graph(4, 3), levels in 1usize..4, port_bits in 1u32..16, t in 1usize..5) {
        let n = g.num_vertices();
        let port: Vec<usize> = (0..n).filter(|v| port_bits >> v & 1 == 1).collect();
        prop_assume!(!port.is_empty() && t <= n);
        let base = relative_cheeger_exact(&g, &port, t).unwrap();
        let th = thicken(&g, levels);
        for r in 0..levels {
            let lifted: Vec<usize> = port.iter().map(|&v| th.vertex(v, r)).collect();
            let got = relative_cheeger_exact(&th.graph, &lifted, t).unwrap();
            prop_assert!(got.at_least(min1(base, levels as u64)), "level {}: {:?} vs {:?}", r, got, base);
        }
    }
}

/// Nontrivial logical: random product of basis logicals and checks.
fn random_logical(code: &StabilizerCode, pick: u64) -> PauliOperator {
    let basis = logical_basis(code);
    let mut p = PauliOperator::identity(code.n());
    let sel = (pick % ((1 << basis.len()) - 1)) + 1;
    for (i, l) in basis.iter().enumerate() {
        if sel >> i & 1 == 1 {
            p = p.mul_unsigned(l);
        }
    }
    for (i, s) in code.generators().iter().enumerate() {
        if pick >> (16 + i) & 1 == 1 {
            p = p.mul_unsigned(s);
        }
    }
    if pick >> 40 & 1 == 1 {
        p = p.negated();
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn merged_code_invariants(which in 0usize..2, pick in any::<u64>(), seed in any::<u64>()) {
        let code = if which == 0 { fixtures::four_two_two() } else { fixtures::steane() };
        let l = random_logical(&code, pick);
        prop_assume!(!code.in_stabilizer_group(&l));
        let caps = Caps::for_measurement_graph(ldpc_profile(&code));
        let gb = build_measurement_graph(&code, &l, Ratio::from_integer(1), seed, &caps).unwrap();
        let m = build_merged_code(&code, &l, &gb.ported).unwrap();
        let checks = m.checks();
        for a in &checks {
            for b in &checks {
                prop_assert!(!a.anticommutes_with(b));
            }
        }
        let prod = m.vertex_checks.iter().fold(PauliOperator::identity(m.n_total()), |acc, a| acc.mul_commuting(a));
        prop_assert_eq!(prod, l.extended(m.n_total()));
        prop_assert_eq!(m.code().k(), code.k() - 1);
        prop_assert!(gb.ported.graph.num_edges() <= gb.edge_bound);
    }
}

#[test]
fn triple_bundle_is_accepted_at_the_floor() {
    let mut g = MultiGraph::new(2);
    for _ in 0..3 {
        g.add_edge(0, 1);
    }
    let b = decongest(&g, 0).unwrap();
    assert_eq!(b.rho, 2);
}
