use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsurgery::archkit::{assemble, uniform_blocks, BlockMap};
use qsurgery::config::Caps;
use qsurgery::extractor::{
    bridge_extractors, build_eac_tanner, build_extractor, check_extractor_desiderata, instantiate_measurement,
    structural_diff,
};
use qsurgery::f2la::{self, BitMatrix, BitVector};
use qsurgery::graphkit::{decongest, greedy_partition, relative_cheeger_exact, thicken, Beta, MultiGraph};
use qsurgery::paulicode::{distance_bruteforce, fixtures, ldpc_profile, logical_basis, Distance, PauliOperator, StabilizerCode};
use qsurgery::pbc::{
    compile, random_compatible_circuit, reduced_depth, reduced_layers, simulate_circuit, verify_compilation,
    BlockPartition, Circuit, Gate,
};
use qsurgery::simkit::{fault_search, protocol_oracle, Rounds, Tableau};
use qsurgery::surgery::{bridge_ported, build_measurement_graph, build_merged_code, check_desiderata, MergedCode};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn symplectic_rank(ops: &[PauliOperator], n: usize) -> usize {
    let rows = ops.iter().map(|p| p.symplectic()).collect();
    f2la::rank(&BitMatrix::from_rows(2 * n, rows).unwrap())
}

/// Random element of the logical group outside the stabilizer group.
fn random_logical(code: &StabilizerCode, rng: &mut ChaCha8Rng) -> PauliOperator {
    let basis = logical_basis(code);
    loop {
        let mut p = PauliOperator::identity(code.n());
        for l in &basis {
            if rng.gen() {
                p = p.mul_unsigned(l);
            }
        }
        for s in code.generators() {
            if rng.gen() {
                p = p.mul_unsigned(s);
            }
        }
        if !code.in_stabilizer_group(&p) {
            return if rng.gen() { p.negated() } else { p };
        }
    }
}

/// True when some nontrivial logical of `checks` has weight below `w`.
fn has_logical_below(checks: &[PauliOperator], n: usize, w: usize) -> bool {
    let r0 = symplectic_rank(checks, n);
    let mut found = false;
    let mut support = Vec::new();
    fn rec(
        checks: &[PauliOperator],
        n: usize,
        r0: usize,
        left: usize,
        start: usize,
        support: &mut Vec<usize>,
        found: &mut bool,
    ) {
        if *found {
            return;
        }
        if !support.is_empty() {
            let combos = 3usize.pow(support.len() as u32);
            for c in 0..combos {
                let mut p = PauliOperator::identity(n);
                let mut cc = c;
                for &q in support.iter() {
                    p.set(q, [qsurgery::paulicode::Pauli::X, qsurgery::paulicode::Pauli::Y, qsurgery::paulicode::Pauli::Z][cc % 3]);
                    cc /= 3;
                }
                if checks.iter().all(|s| !s.anticommutes_with(&p)) {
                    let mut with = checks.to_vec();
                    with.push(p);
                    if symplectic_rank(&with, n) > r0 {
                        *found = true;
                        return;
                    }
                }
            }
        }
        if left == 0 {
            return;
        }
        for q in start..n {
            support.push(q);
            rec(checks, n, r0, left - 1, q + 1, support, found);
            support.pop();
        }
    }
    rec(checks, n, r0, w.saturating_sub(1), 0, &mut support, &mut found);
    found
}

fn c1_merged_codes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total = 0;
    let mut distance_checked = 0;
    for (name, code, d_known) in [("[[4,2,2]]", fixtures::four_two_two(), 2), ("Steane", fixtures::steane(), 3)] {
        let d = match distance_bruteforce(&code, 22).map_err(|e| e.to_string())? {
            Distance::Exact(d) => d,
            other => return Err(format!("{name}: distance {other:?}")),
        };
        ensure(d == d_known, || format!("{name}: distance {d}, expected {d_known}"))?;
        let mut ops = logical_basis(&code);
        for _ in 0..5 {
            ops.push(random_logical(&code, &mut rng));
        }
        let caps = Caps::for_measurement_graph(ldpc_profile(&code));
        for (i, l) in ops.iter().enumerate() {
            let g = build_measurement_graph(&code, l, Ratio::from_integer(1), i as u64, &caps).map_err(|e| format!("{name} {l}: {e}"))?;
            let m = build_merged_code(&code, l, &g.ported).map_err(|e| format!("{name} {l}: {e}"))?;
            let checks = m.checks();
            for (a, x) in checks.iter().enumerate() {
                for (b, y) in checks.iter().enumerate().skip(a + 1) {
                    ensure(!x.anticommutes_with(y), || format!("{name} {l}: checks {a} and {b} anticommute"))?;
                }
            }
            let prod = m.vertex_checks.iter().fold(PauliOperator::identity(m.n_total()), |acc, v| acc.mul_commuting(v));
            ensure(prod == l.extended(m.n_total()), || format!("{name} {l}: vertex product is {prod}"))?;
            let k = m.n_total() - symplectic_rank(&checks, m.n_total());
            ensure(k + 1 == code.k(), || format!("{name} {l}: merged code has {k} logicals"))?;
            let report = check_desiderata(&g.ported, &code, l, d, &caps);
            if report.pass() && k > 0 {
                ensure(!has_logical_below(&checks, m.n_total(), d), || format!("{name} {l}: merged distance below {d}"))?;
                distance_checked += 1;
            }
            total += 1;
        }
    }
    Ok(format!("{total} merged codes; distance >= base shown on {distance_checked} with k-1 > 0"))
}

/// Measurement fixtures with at most `cap` total qubits.
fn small_fixtures(cap: usize) -> Vec<(String, StabilizerCode, PauliOperator, MergedCode)> {
    let mut out = Vec::new();
    for name in ["4_2_2", "bell", "rep2", "5_1_3", "steane"] {
        let code = fixtures::by_name(name).unwrap();
        let basis = logical_basis(&code);
        let caps = Caps::for_measurement_graph(ldpc_profile(&code));
        for mask in 1u32..(1 << basis.len()) {
            let l = basis
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(PauliOperator::identity(code.n()), |acc, (_, b)| acc.mul_unsigned(b));
            for seed in 0..2 {
                let Ok(g) = build_measurement_graph(&code, &l, Ratio::from_integer(1), seed, &caps) else { continue };
                let Ok(m) = build_merged_code(&code, &l, &g.ported) else { continue };
                if m.n_total() <= cap {
                    out.push((format!("{name} {l} seed {seed}"), code.clone(), l.clone(), m));
                }
            }
        }
    }
    let code = fixtures::four_two_two();
    let caps = Caps::for_measurement_graph(ldpc_profile(&code));
    let l1 = logical_basis(&code)[0].clone();
    let g1 = build_measurement_graph(&code, &l1, Ratio::from_integer(1), 1, &caps).unwrap();
    let g2 = build_measurement_graph(&code, &l1, Ratio::from_integer(1), 2, &caps).unwrap();
    let joined = bridge_ported(&g1.ported, code.n(), &g2.ported, 2).unwrap();
    let union = code.direct_sum(&code);
    let l = l1.tensor(&l1);
    let m = build_merged_code(&union, &l, &joined).unwrap();
    if m.n_total() <= cap {
        out.push((format!("bridged [[4,2,2]] pair {l}"), union, l, m));
    }
    out
}

fn c2_protocol_oracle() -> Check {
    let fixtures = small_fixtures(14);
    ensure(fixtures.len() >= 5, || format!("only {} fixtures fit in 14 qubits", fixtures.len()))?;
    let (mut states, mut branches) = (0, 0u64);
    for (name, code, l, m) in &fixtures {
        let mut fixes = vec![Vec::new(), vec![l.clone()], vec![l.negated()]];
        for b in logical_basis(code) {
            if b.anticommutes_with(l) || b.unsigned() != l.unsigned() {
                fixes.push(vec![b.clone()]);
                if !b.anticommutes_with(l) {
                    fixes.push(vec![b.negated()]);
                }
            }
        }
        for f in fixes {
            let init = Tableau::code_state(code, &f).map_err(|e| format!("{name}: {e}"))?;
            let r = protocol_oracle(code, m, &init, 14).map_err(|e| format!("{name}: {e}"))?;
            ensure(r.ok(), || format!("{name} fixed {f:?}: {:?}", r.mismatches))?;
            states += 1;
            branches += r.branches;
        }
    }
    Ok(format!("{} fixtures, {states} initial states, {branches} branches all match", fixtures.len()))
}

fn c3_fault_search() -> Check {
    let code = fixtures::four_two_two();
    let l: PauliOperator = "ZZII".parse().unwrap();
    let caps = Caps::for_measurement_graph(ldpc_profile(&code));
    let g = build_measurement_graph(&code, &l, Ratio::from_integer(1), 0, &caps).map_err(|e| e.to_string())?;
    let merged = build_merged_code(&code, &l, &g.ported).map_err(|e| e.to_string())?;
    let one = fault_search(&merged, Rounds { pre: 1, merge: 1, post: 1 }, 1).map_err(|e| e.to_string())?;
    let two = fault_search(&merged, Rounds::uniform(2), 1).map_err(|e| e.to_string())?;
    let mut broken = merged.clone();
    broken.vertex_checks.remove(1);
    let bad = fault_search(&broken, Rounds { pre: 1, merge: 1, post: 1 }, 1).map_err(|e| e.to_string())?;
    let detail = format!(
        "1+1+1: {}; 2+2+2: {}; vertex check removed: {}",
        one.verdict(),
        two.verdict(),
        bad.verdict()
    );
    let ok = one.violation.is_none() && one.complete && two.violation.is_none() && bad.violation.is_some();
    if ok {
        Ok(detail)
    } else {
        Err(format!("{detail}; a single merge round leaves a lone vertex-check flip undetected"))
    }
}

fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> MultiGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = MultiGraph::new(n);
    for i in 1..n {
        let p = order[rng.gen_range(0..i)];
        g.add_edge(p, order[i]);
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.add_edge(a, b);
        }
    }
    g
}

fn c4_decongestion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for run in 0..50 {
        let n = rng.gen_range(8..=64);
        let extra = rng.gen_range(n / 2..=2 * n);
        let g = random_connected(&mut rng, n, extra);
        let b = decongest(&g, run).map_err(|e| format!("graph {run}: {e}"))?;
        let inc = g.incidence();
        ensure(b.cycles.iter().all(|c| inc.mul_vec(&g.edge_vector(c)).is_zero()), || format!("graph {run}: not a cycle"))?;
        let rows: Vec<BitVector> = b.cycles.iter().map(|c| g.edge_vector(c)).collect();
        let dim = g.num_edges() + 1 - n;
        ensure(rows.len() == dim && f2la::rank(&BitMatrix::from_rows(g.num_edges(), rows).unwrap()) == dim, || {
            format!("graph {run}: not a basis")
        })?;
        let mut load = vec![0usize; g.num_edges()];
        b.cycles.iter().flatten().for_each(|&e| load[e] += 1);
        let rho = load.into_iter().max().unwrap_or(0) as f64;
        let lg = (n as f64).log2();
        let rho_bound = lg * (2.0 * g.num_edges() as f64).ln();
        ensure(rho < rho_bound, || format!("graph {run}: congestion {rho} >= {rho_bound:.2}"))?;
        let part = greedy_partition(&b);
        for p in &part.parts {
            let mut used = vec![false; g.num_edges()];
            for &i in p {
                for &e in &b.cycles[i] {
                    ensure(!used[e], || format!("graph {run}: part not edge-disjoint"))?;
                    used[e] = true;
                }
            }
        }
        ensure(part.parts.len() as f64 <= lg * rho + 1.0, || format!("graph {run}: {} parts", part.parts.len()))?;
        worst = worst.max(rho / rho_bound);
    }
    Ok(format!("50 graphs, max congestion ratio to bound {worst:.2}"))
}

/// Per level and per level pattern, the smallest cut of `G□J_ℓ` by
/// enumerating every subset not containing the last vertex.
fn level_cuts(g: &MultiGraph, levels: usize) -> Vec<Vec<u64>> {
    let th = thicken(g, levels);
    let n = g.num_vertices();
    let big = th.graph.num_vertices();
    let mut adj = vec![Vec::new(); big];
    for &(u, v) in th.graph.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut best = vec![vec![u64::MAX; 1 << n]; levels];
    let record = |best: &mut Vec<Vec<u64>>, s: u64, cut: u64| {
        for (r, row) in best.iter_mut().enumerate() {
            let pat = ((s >> (r * n)) & ((1 << n) - 1)) as usize;
            row[pat] = row[pat].min(cut);
        }
    };
    let mut s = 0u64;
    let mut cut: i64 = 0;
    record(&mut best, s, 0);
    for i in 1u64..(1u64 << (big - 1)) {
        let v = i.trailing_zeros() as usize;
        let inside = adj[v].iter().filter(|&&w| s >> w & 1 == 1).count() as i64;
        let outside = adj[v].len() as i64 - inside;
        if s >> v & 1 == 0 {
            cut += outside - inside;
        } else {
            cut -= outside - inside;
        }
        s ^= 1 << v;
        record(&mut best, s, cut as u64);
    }
    best
}

fn c5_thickening() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut comparisons = 0u64;
    for inst in 0..200 {
        let n = rng.gen_range(2..=6);
        let extra = rng.gen_range(0..=n);
        let g = random_connected(&mut rng, n, extra);
        for levels in 1..=4 {
            let cuts = level_cuts(&g, levels);
            for pmask in 1u32..(1 << n) {
                let port: Vec<usize> = (0..n).filter(|v| pmask >> v & 1 == 1).collect();
                let np = port.len();
                for t in 1..=n {
                    let base = relative_cheeger_exact(&g, &port, t).map_err(|e| e.to_string())?;
                    let need = match base {
                        Beta::Infinite => Ratio::from_integer(1),
                        Beta::Finite(b) => (b * levels as u64).min(Ratio::from_integer(1)),
                    };
                    for (r, row) in cuts.iter().enumerate() {
                        for (pat, &c) in row.iter().enumerate() {
                            if c == u64::MAX {
                                continue;
                            }
                            let inside = (pat as u32 & pmask).count_ones() as usize;
                            let m = t.min(inside).min(np - inside) as u64;
                            if m == 0 {
                                continue;
                            }
                            comparisons += 1;
                            ensure(Ratio::new(c, m) >= need, || {
                                format!("instance {inst}, levels {levels}, port {port:?}, t {t}, level {r}: cut {c}/{m} below {need}")
                            })?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("200 graphs, levels 1..4, all ports and t: {comparisons} cut ratios, 0 violations"))
}

fn c6_extractor_universality() -> Check {
    let code = fixtures::steane();
    let caps = Caps::for_extractor(ldpc_profile(&code));
    let x = build_extractor(&code, Ratio::from_integer(1), 6, &caps).map_err(|e| e.to_string())?;
    let report = check_extractor_desiderata(&x, &code, 3, &caps);
    ensure(report.pass(), || format!("extractor desiderata: {:?}", report.diagnostics))?;
    let block = build_eac_tanner(&code, &x).map_err(|e| e.to_string())?;
    let basis = logical_basis(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut merged = Vec::new();
    for class in 1u32..(1 << basis.len()) {
        let rep = basis
            .iter()
            .enumerate()
            .filter(|(i, _)| class >> i & 1 == 1)
            .fold(PauliOperator::identity(code.n()), |acc, (_, b)| acc.mul_unsigned(b));
        for _ in 0..8 {
            let mut l = rep.clone();
            for s in code.generators() {
                if rng.gen() {
                    l = l.mul_unsigned(s);
                }
            }
            if rng.gen() {
                l = l.negated();
            }
            let inst = instantiate_measurement(&block, &l).map_err(|e| format!("{l}: {e}"))?;
            let m = inst.merged;
            let checks = m.checks();
            for (a, p) in checks.iter().enumerate() {
                ensure(checks[a + 1..].iter().all(|q| !p.anticommutes_with(q)), || format!("{l}: check {a} anticommutes"))?;
            }
            let prod = m.vertex_checks.iter().fold(PauliOperator::identity(m.n_total()), |acc, v| acc.mul_commuting(v));
            ensure(prod == l.extended(m.n_total()), || format!("{l}: vertex product {prod}"))?;
            ensure(m.n_total() - symplectic_rank(&checks, m.n_total()) + 1 == code.k(), || format!("{l}: logical count"))?;
            merged.push((l, m));
        }
    }
    let mut pairs = 0;
    for (i, (la, a)) in merged.iter().enumerate() {
        for (lb, b) in &merged[i + 1..] {
            ensure(a.graph.edges() == b.graph.edges() && a.cycle_checks == b.cycle_checks, || format!("{la} vs {lb}: skeleton"))?;
            let diff = structural_diff(a, b);
            ensure(diff.only_couplings(), || format!("{la} vs {lb}: {:?}", diff.skeleton))?;
            pairs += 1;
        }
    }
    Ok(format!("{} operators over 3 logical classes; {pairs} pairwise diffs touch only coupling checks", merged.len()))
}

/// `β_t(G, P)` by listing every vertex subset; `None` is infinite.
fn exact_beta(g: &MultiGraph, port: &[usize], t: usize) -> Option<Ratio<u64>> {
    let n = g.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let pmask: u64 = port.iter().fold(0, |m, &p| m | 1 << p);
    let np = port.len();
    let mut best: Option<Ratio<u64>> = None;
    let (mut s, mut cut) = (0u64, 0i64);
    for i in 1u64..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize;
        let inside = adj[v].iter().filter(|&&w| s >> w & 1 == 1).count() as i64;
        let delta = adj[v].len() as i64 - 2 * inside;
        cut += if s >> v & 1 == 0 { delta } else { -delta };
        s ^= 1 << v;
        let k = (s & pmask).count_ones() as usize;
        let m = t.min(k).min(np - k);
        if m > 0 {
            let r = Ratio::new(cut as u64, m as u64);
            if best.is_none_or(|b| r < b) {
                best = Some(r);
            }
        }
    }
    best
}

fn c7_bridges() -> Check {
    let names = ["rep2", "bell", "4_2_2", "5_1_3", "steane"];
    let mut xs = Vec::new();
    for name in names {
        let code = fixtures::by_name(name).unwrap();
        let caps = Caps::for_extractor(ldpc_profile(&code));
        xs.push(build_extractor(&code, Ratio::from_integer(1), 7, &caps).map_err(|e| format!("{name}: {e}"))?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut exact = 0;
    for run in 0..30u64 {
        let (i, j) = (rng.gen_range(0..names.len()), rng.gen_range(0..names.len()));
        let (x1, x2) = (&xs[i], &xs[j]);
        let d = rng.gen_range(1..=x1.port.len().min(x2.port.len()).min(3));
        let caps = Caps::default();
        let (joined, bridge) =
            bridge_extractors(x1, x2, d, run, &caps).map_err(|e| format!("{} + {}: {e}", names[i], names[j]))?;
        let label = format!("{} + {} (d = {d})", names[i], names[j]);
        ensure(bridge.pairs.len() == d && bridge.cycles.len() == d - 1, || format!("{label}: bridge inventory"))?;
        let g = &joined.graph;
        let inc = g.incidence();
        let rows: Vec<BitVector> = joined.basis.cycles.iter().map(|c| g.edge_vector(c)).collect();
        ensure(rows.iter().all(|r| inc.mul_vec(r).is_zero()), || format!("{label}: basis element is not a cycle"))?;
        let dim = g.num_edges() + g.components().1 - g.num_vertices();
        ensure(rows.len() == dim && f2la::rank(&BitMatrix::from_rows(g.num_edges(), rows).unwrap()) == dim, || {
            format!("{label}: not a cycle basis")
        })?;
        let congestion = |cycles: &[Vec<usize>], m: usize| {
            let mut load = vec![0usize; m];
            cycles.iter().flatten().for_each(|&e| load[e] += 1);
            load.into_iter().max().unwrap_or(0)
        };
        let rho = congestion(&joined.basis.cycles, g.num_edges());
        let rho0 = congestion(&x1.basis.cycles, x1.graph.num_edges()).max(congestion(&x2.basis.cycles, x2.graph.num_edges()));
        let len = joined.basis.cycles.iter().map(Vec::len).max().unwrap_or(0);
        let gamma = x1.basis.cycles.iter().chain(&x2.basis.cycles).map(Vec::len).max().unwrap_or(0);
        ensure(rho <= rho0 + 2, || format!("{label}: congestion {rho} > {rho0} + 2"))?;
        ensure(len <= gamma.max(8), || format!("{label}: cycle length {len} > max({gamma}, 8)"))?;
        if g.num_vertices() <= 24 {
            let t = x1.t.min(x2.t).min(d);
            let beta = exact_beta(g, &joined.port_vertices(), t);
            ensure(beta.is_none_or(|b| b >= Ratio::from_integer(1)), || format!("{label}: joined expansion {beta:?} < 1"))?;
            exact += 1;
        }
    }
    Ok(format!("30 bridges within congestion and length bounds; joined expansion >= 1 exact on {exact} small instances"))
}

/// Independent state-vector run of a circuit; bit `q` of the index is qubit `q`.
fn direct_probabilities(c: &Circuit) -> Vec<f64> {
    use num_complex::Complex64 as C;
    let n = c.num_qubits;
    let mut a = vec![C::new(0.0, 0.0); 1 << n];
    a[0] = C::new(1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    for g in &c.gates {
        let one = |a: &mut Vec<C>, q: usize, m: [[C; 2]; 2]| {
            for i in 0..a.len() {
                if i >> q & 1 == 0 {
                    let j = i | 1 << q;
                    let (x, y) = (a[i], a[j]);
                    a[i] = m[0][0] * x + m[0][1] * y;
                    a[j] = m[1][0] * x + m[1][1] * y;
                }
            }
        };
        let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
        match *g {
            Gate::X(q) => one(&mut a, q, [[z, o], [o, z]]),
            Gate::Y(q) => one(&mut a, q, [[z, -i], [i, z]]),
            Gate::Z(q) => one(&mut a, q, [[o, z], [z, -o]]),
            Gate::H(q) => one(&mut a, q, [[o * h, o * h], [o * h, -o * h]]),
            Gate::S(q) => one(&mut a, q, [[o, z], [z, i]]),
            Gate::Sdg(q) => one(&mut a, q, [[o, z], [z, -i]]),
            Gate::T(q) => one(&mut a, q, [[o, z], [z, t]]),
            Gate::Tdg(q) => one(&mut a, q, [[o, z], [z, t.conj()]]),
            Gate::Cnot(ct, tg) => {
                for k in 0..a.len() {
                    if k >> ct & 1 == 1 && k >> tg & 1 == 0 {
                        a.swap(k, k | 1 << tg);
                    }
                }
            }
            Gate::MeasureZ(_) => {}
        }
    }
    a.iter().map(|x| x.norm_sqr()).collect()
}

/// The 50 circuits shared by the compilation and depth criteria.
fn circuit_suite() -> Vec<(Circuit, BlockPartition, BlockMap, u64)> {
    let shapes = [(2usize, 5usize), (2, 4), (2, 3), (3, 3), (3, 2), (4, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    (0..50u64)
        .map(|s| {
            let (b, k) = shapes[s as usize % shapes.len()];
            let p = BlockPartition::contiguous((k - 1) * b, k).unwrap();
            let m = if rng.gen() { BlockMap::cycle(b) } else { BlockMap::line(b) };
            let c = random_compatible_circuit(&p, &m, rng.gen_range(5..=40), s);
            (c, p, m, s)
        })
        .collect()
}

fn c8_compilation() -> Check {
    let mut branches = 0;
    for (c, p, m, s) in circuit_suite() {
        let k = p.num_qubits();
        ensure(k <= 8 && k + p.num_blocks() < 12 + 1, || format!("circuit {s}: {k} qubits"))?;
        let comp = compile(&c, &p, &m).map_err(|e| format!("circuit {s}: {e}"))?;
        let r = verify_compilation(&comp, 12, s).map_err(|e| format!("circuit {s}: {e}"))?;
        ensure(r.ok, || format!("circuit {s}: {r:?}"))?;
        let lib = simulate_circuit(&comp.circuit);
        let own = direct_probabilities(&comp.circuit);
        let diff = lib.iter().zip(&own).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure(diff < 1e-9, || format!("circuit {s}: reference simulators differ by {diff}"))?;
        branches += r.branches;
    }
    Ok(format!("50 circuits verified exactly ({branches} gadget branches followed)"))
}

fn c9_depth() -> Check {
    let mut colored = 0;
    for (c, p, m, s) in circuit_suite() {
        let comp = compile(&c, &p, &m).map_err(|e| format!("circuit {s}: {e}"))?;
        let sch = &comp.schedule;
        let (k, lambda) = (p.k, reduced_depth(&comp.circuit, &p));
        ensure(sch.lambda == lambda, || format!("circuit {s}: reduced depth {} vs {lambda}", sch.lambda))?;
        ensure(sch.depth < 4 * k * lambda + k, || format!("circuit {s}: depth {} >= {}", sch.depth, 4 * k * lambda + k))?;
        for (li, layer) in sch.layers.iter().enumerate() {
            let mut busy = vec![false; p.num_blocks()];
            for meas in layer {
                if let [x, y] = meas.blocks[..] {
                    ensure(m.adjacent(x, y), || format!("circuit {s} layer {li}: blocks {x},{y} not bridged"))?;
                }
                ensure(meas.blocks.len() <= 2, || format!("circuit {s} layer {li}: wide measurement"))?;
                for &b in &meas.blocks {
                    ensure(!busy[b], || format!("circuit {s} layer {li}: block {b} twice"))?;
                    busy[b] = true;
                }
            }
        }
        let (layers, _) = reduced_layers(&comp.circuit, &p);
        for l in 1..=lambda {
            let mut deg = vec![0usize; p.num_blocks()];
            for (gi, g) in comp.circuit.gates.iter().enumerate() {
                if layers[gi] != l {
                    continue;
                }
                let mut bs: Vec<usize> = g.qubits().iter().filter_map(|&q| p.block_of(q)).collect();
                bs.dedup();
                bs.iter().for_each(|&b| deg[b] += 1);
            }
            if deg.iter().all(|&d| d < k) {
                ensure(sch.layer_colors[l - 1] <= 2 * (k - 1), || {
                    format!("circuit {s} layer {l}: {} colours > {}", sch.layer_colors[l - 1], 2 * (k - 1))
                })?;
                colored += 1;
            }
        }
    }
    Ok(format!("50 schedules within 4k*Lambda + k, layers block-disjoint and bridged, {colored} reduced layers within 2(k-1) colours"))
}

fn c10_architecture() -> Check {
    let code = fixtures::steane();
    let caps = Caps::for_extractor(ldpc_profile(&code));
    let d = 3;
    let mut built = 0;
    for b in 2..=4usize {
        for cycle in [false, true] {
            if cycle && b < 3 {
                continue;
            }
            let map = if cycle { BlockMap::cycle(b) } else { BlockMap::line(b) };
            let blocks = uniform_blocks(&code, b, Ratio::from_integer(1), 10, &caps).map_err(|e| e.to_string())?;
            let a = assemble(blocks, map, d, b as u64, &caps).map_err(|e| e.to_string())?;
            let shape = if cycle { "cycle" } else { "line" };
            let mut total = 0;
            let mut per_block = None;
            for blk in &a.blocks {
                let x = &blk.xgraph;
                let q = code.n() + x.graph.num_edges() + code.generators().len() + x.graph.num_vertices() + x.basis.cycles.len();
                ensure(q == blk.total_qubits(), || format!("{shape} {b}: block inventory {q} vs {}", blk.total_qubits()))?;
                ensure(per_block.is_none_or(|p| p == q), || format!("{shape} {b}: blocks not uniform"))?;
                per_block = Some(q);
                total += q;
            }
            for br in &a.bridges {
                ensure(br.pairs.len() == d && br.cycles.len() == d - 1, || {
                    format!("{shape} {b}: bridge has {} data and {} checks", br.pairs.len(), br.cycles.len())
                })?;
                total += br.pairs.len() + br.cycles.len();
            }
            let r = a.map.graph.num_edges();
            let formula = b * per_block.unwrap() + r * (2 * d - 1);
            ensure(total == formula && a.params.total_qubits == total, || {
                format!("{shape} {b}: inventory {total}, params {}, formula {formula}", a.params.total_qubits)
            })?;
            ensure(a.params.formula_total.is_some_and(|f| f == formula as f64), || format!("{shape} {b}: reported formula"))?;
            built += 1;
        }
    }
    Ok(format!("{built} Steane architectures (d = 3): totals equal B(lambda*n + alpha(2d-1)) exactly"))
}

struct Criterion {
    id: usize,
    name: &'static str,
    run: fn() -> Check,
    /// Whether this build is expected to meet the criterion.
    expected: bool,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "merged-code correctness", run: c1_merged_codes, expected: true },
        Criterion { id: 2, name: "protocol oracle equivalence", run: c2_protocol_oracle, expected: true },
        Criterion { id: 3, name: "fault search", run: c3_fault_search, expected: false },
        Criterion { id: 4, name: "decongestion bounds", run: c4_decongestion, expected: true },
        Criterion { id: 5, name: "thickening expansion", run: c5_thickening, expected: true },
        Criterion { id: 6, name: "extractor universality", run: c6_extractor_universality, expected: true },
        Criterion { id: 7, name: "bridge bounds", run: c7_bridges, expected: true },
        Criterion { id: 8, name: "compilation end-to-end", run: c8_compilation, expected: true },
        Criterion { id: 9, name: "depth accounting", run: c9_depth, expected: true },
        Criterion { id: 10, name: "architecture accounting", run: c10_architecture, expected: true },
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("{tag} {:>2} {} ({secs:.1}s): {detail}", c.id, c.name);
        if result.is_ok() {
            passed += 1;
        }
        if result.is_ok() != c.expected {
            unexpected += 1;
        }
    }
    println!("{passed}/{} criteria pass; {unexpected} differ from the recorded expectation", criteria.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
