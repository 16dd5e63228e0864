use gpc_core::fock::{enumerate_determinants, BasisSpec, Ladder, SlaterDeterminant};
use proptest::prelude::*;

/// Occupation pattern on up to twelve orbitals with at least one electron.
fn occupation() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (1usize..=12)
        .prop_flat_map(|m| (Just(m), proptest::collection::vec(any::<bool>(), m)))
        .prop_filter_map("empty", |(m, bits)| {
            let occ: Vec<usize> = bits
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i + 1)
                .collect();
            (!occ.is_empty()).then_some((m, occ))
        })
}

/// Sign of the permutation sorting `v`, by counting inversions.
fn sort_parity(v: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `a†_q a_p` acting on an ordered product: put `q` in `p`'s slot, then sort.
fn slot_oracle(occ: &[usize], create: usize, annihilate: usize) -> Option<(Vec<usize>, i8)> {
    let slot = occ.iter().position(|&x| x == annihilate)?;
    if create != annihilate && occ.contains(&create) {
        return None;
    }
    let mut replaced = occ.to_vec();
    replaced[slot] = create;
    let sign = sort_parity(&replaced);
    replaced.sort_unstable();
    Some((replaced, sign))
}

proptest! {
    #[test]
    fn rank_round_trip((m, occ) in occupation()) {
        let basis = BasisSpec::new(occ.len(), m).unwrap();
        let det = SlaterDeterminant::in_basis(&basis, &occ).unwrap();
        let rank = det.rank();
        prop_assert!(rank < basis.dimension());
        prop_assert_eq!(SlaterDeterminant::unrank(&basis, rank).unwrap(), det);
        prop_assert_eq!(enumerate_determinants(&basis)[rank as usize], det);
    }

    #[test]
    fn number_operator_is_idempotent((_m, occ) in occupation(), p in 1usize..=12) {
        let det = SlaterDeterminant::new(&occ).unwrap();
        let once = det.apply_excitation(p, p);
        if det.contains(p) {
            prop_assert_eq!(once.det, Some(det));
            prop_assert_eq!(once.sign, 1);
            let twice = once.then(Ladder::Annihilate(p)).then(Ladder::Create(p));
            prop_assert_eq!(twice, once);
        } else {
            prop_assert!(once.is_null());
        }
    }

    #[test]
    fn hop_and_return_restores((m, occ) in occupation(), pick in any::<prop::sample::Index>(), q in 1usize..=12) {
        prop_assume!(q <= m);
        let det = SlaterDeterminant::new(&occ).unwrap();
        let p = occ[pick.index(occ.len())];
        prop_assume!(!det.contains(q));
        let there = det.apply_excitation(q, p);
        let target = there.det.unwrap();
        let back = target.apply_excitation(p, q);
        prop_assert_eq!(back.det, Some(det));
        prop_assert_eq!(there.sign * back.sign, 1);
    }

    #[test]
    fn excitation_matches_slot_oracle((m, occ) in occupation(), p in 1usize..=12, q in 1usize..=12) {
        prop_assume!(p <= m && q <= m);
        let det = SlaterDeterminant::new(&occ).unwrap();
        let got = det.apply_excitation(q, p);
        match slot_oracle(&occ, q, p) {
            None => prop_assert!(got.is_null()),
            Some((orbitals, sign)) => {
                prop_assert_eq!(got.det.unwrap().orbitals(), orbitals);
                prop_assert_eq!(got.sign, sign);
            }
        }
    }

    #[test]
    fn excitation_order_is_symmetric(
        (m, a) in occupation(),
        seed in proptest::collection::vec(any::<prop::sample::Index>(), 12),
    ) {
        // second determinant with the same electron count
        let mut pool: Vec<usize> = (1..=m).collect();
        let mut b = Vec::new();
        for idx in seed.iter().take(a.len()) {
            b.push(pool.remove(idx.index(pool.len())));
        }
        b.sort_unstable();
        let da = SlaterDeterminant::new(&a).unwrap();
        let db = SlaterDeterminant::new(&b).unwrap();
        let k = da.excitation_order(&db).unwrap();
        prop_assert_eq!(k, db.excitation_order(&da).unwrap());
        prop_assert_eq!(k, da.difference(&db).len());
        prop_assert_eq!(k, db.difference(&da).len());
        prop_assert_eq!(k == 0, da == db);
    }
}

#[test]
fn enumeration_is_strictly_increasing_in_rank() {
    for (n, m) in [(1, 5), (3, 6), (3, 8), (4, 9), (6, 12)] {
        let basis = BasisSpec::new(n, m).unwrap();
        let dets = enumerate_determinants(&basis);
        assert_eq!(dets.len() as u64, basis.dimension());
        for (i, d) in dets.iter().enumerate() {
            assert_eq!(d.rank(), i as u64);
            assert_eq!(d.len(), n);
        }
    }
}

#[test]
fn string_matches_composed_slot_oracle() {
    // a†_5 a_3 a†_4 a_2 |123>: rightmost pair first
    let det = SlaterDeterminant::new(&[1, 2, 3]).unwrap();
    let (mid, s1) = slot_oracle(&[1, 2, 3], 4, 2).unwrap();
    let (end, s2) = slot_oracle(&mid, 5, 3).unwrap();
    let got = det.apply_string(&[
        Ladder::Create(5),
        Ladder::Annihilate(3),
        Ladder::Create(4),
        Ladder::Annihilate(2),
    ]);
    assert_eq!(got.det.unwrap().orbitals(), end);
    assert_eq!(got.sign, s1 * s2);
}
