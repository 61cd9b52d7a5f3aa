use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_rational::Ratio;
use proptest::prelude::*;
use qsurgery::archkit::{assemble, plan_parallel, uniform_blocks, Architecture, BlockMap};
use qsurgery::config::Caps;
use qsurgery::paulicode::{fixtures, ldpc_profile, logical_basis, PauliOperator, StabilizerCode};
use qsurgery::simkit::{run_protocol, SeededBits, Tableau};
use qsurgery::surgery::{build_measurement_graph, build_merged_code};

fn combo(basis: &[PauliOperator], n: usize, mask: u64) -> PauliOperator {
    basis.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(PauliOperator::identity(n), |acc, (_, l)| acc.mul_unsigned(l))
}

fn measured(code: &StabilizerCode, mask: u64) -> PauliOperator {
    let basis = logical_basis(code);
    combo(&basis, code.n(), mask % ((1 << basis.len()) - 1) + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn repeating_the_protocol_repeats_the_outcome(mask in any::<u64>(), fix in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>(), g in any::<u64>()) {
        let code = fixtures::four_two_two();
        let l = measured(&code, mask);
        let caps = Caps::for_measurement_graph(ldpc_profile(&code));
        let gb = build_measurement_graph(&code, &l, Ratio::from_integer(1), g, &caps).unwrap();
        let merged = build_merged_code(&code, &l, &gb.ported).unwrap();
        let fixes = vec![measured(&code, fix)];
        let init = Tableau::code_state(&code, &fixes).unwrap();
        let (t1, after) = run_protocol(&code, &merged, &init, &mut SeededBits::new(s1)).unwrap();
        let (t2, _) = run_protocol(&code, &merged, &after, &mut SeededBits::new(s2)).unwrap();
        prop_assert_eq!(t1.sigma, t2.sigma);
        prop_assert_eq!(after.peek(&l), Some(t1.sigma));
    }
}

fn line_of_four() -> &'static Architecture {
    static ARCH: OnceLock<Architecture> = OnceLock::new();
    ARCH.get_or_init(|| {
        let code = fixtures::four_two_two();
        let caps = Caps::for_extractor(ldpc_profile(&code));
        let blocks = uniform_blocks(&code, 4, Ratio::from_integer(1), 3, &caps).unwrap();
        assemble(blocks, BlockMap::line(4), 2, 4, &caps).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn parallel_parts_use_disjoint_bridges(split in 0usize..3, masks in prop::collection::vec(any::<u64>(), 4)) {
        let a = line_of_four();
        let parts: Vec<Vec<usize>> = match split {
            0 => vec![vec![0, 1], vec![2, 3]],
            1 => vec![vec![0], vec![1, 2, 3]],
            _ => vec![vec![0, 1, 2], vec![3]],
        };
        let code = &a.blocks[0].code;
        let ops: Vec<PauliOperator> = parts.iter().map(|part| {
            let mut op = PauliOperator::identity(4 * code.n());
            for (i, &b) in part.iter().enumerate() {
                let local = measured(code, masks[(i + b) % 4]);
                for q in local.support() {
                    op.set(b * code.n() + q, local.get(q));
                }
            }
            op
        }).collect();
        let plan = plan_parallel(a, &parts, &ops).unwrap();
        let mut used = BTreeSet::new();
        for (pp, part) in plan.parts.iter().zip(&parts) {
            prop_assert_eq!(pp.active_bridges.len(), part.len() - 1);
            for &e in &pp.active_bridges {
                prop_assert!(used.insert(e));
                let (u, v) = a.map.graph.edge(e);
                prop_assert!(part.contains(&u) && part.contains(&v));
            }
            pp.instantiation.merged.verify().unwrap();
        }
        prop_assert_eq!(used.len() + plan.inactive_bridges.len(), a.map.graph.num_edges());
    }
}
