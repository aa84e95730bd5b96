mod common;

use common::{all_tuples, betti_oracle};
use proptest::prelude::*;

use whitehead::fatwedge::{omega_nontriviality, retraction_obstruction, ring, SphereTuple, SubsetClass};

fn tuple_and_levels() -> impl Strategy<Value = (Vec<u32>, usize, usize)> {
    prop::collection::vec(1u32..6, 2..9).prop_flat_map(|dims| {
        let r = dims.len();
        (Just(dims), 0..r).prop_flat_map(move |(dims, a)| (Just(dims), Just(a), (a + 1)..=r))
    })
}

proptest! {
    #[test]
    fn betti_numbers_match_oracle((dims, a, b) in tuple_and_levels()) {
        let t = SphereTuple::new(dims.clone()).unwrap();
        let q = ring(a, b, &t).unwrap();
        prop_assert_eq!(q.betti(), betti_oracle(&dims, a, b));
    }

    #[test]
    fn cup_is_graded_commutative((dims, a, b) in tuple_and_levels(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let t = SphereTuple::new(dims).unwrap();
        let q = ring(a, b, &t).unwrap();
        let basis = q.basis();
        prop_assume!(!basis.is_empty());
        let x = basis[i.index(basis.len())].clone();
        let y = basis[j.index(basis.len())].clone();
        let sign = if (x.degree() * y.degree()).is_multiple_of(2) { 1 } else { -1 };
        let xy = q.cup(std::slice::from_ref(&x), std::slice::from_ref(&y)).unwrap();
        let yx: Vec<SubsetClass> = q
            .cup(&[y], &[x])
            .unwrap()
            .into_iter()
            .map(|c| t.class(c.mask(), c.coefficient() * sign))
            .collect();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn cup_is_associative_where_defined((dims, a, b) in tuple_and_levels(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let t = SphereTuple::new(dims).unwrap();
        let q = ring(a, b, &t).unwrap();
        let basis = q.basis();
        prop_assume!(!basis.is_empty());
        let pick = |ix: &prop::sample::Index| basis[ix.index(basis.len())].clone();
        let (x, y, z) = (pick(&i), pick(&j), pick(&k));
        let xy = q.cup(std::slice::from_ref(&x), std::slice::from_ref(&y)).unwrap();
        let yz = q.cup(&[y], std::slice::from_ref(&z)).unwrap();
        if !xy.is_empty() && !yz.is_empty() {
            prop_assert_eq!(q.cup(&xy, &[z]).unwrap(), q.cup(&[x], &yz).unwrap());
        }
    }
}

#[test]
fn obstruction_exists_exactly_from_r_4() {
    for r in 2..=8 {
        for dims in all_tuples(r, 3) {
            let t = SphereTuple::new(dims.clone()).unwrap();
            let w = retraction_obstruction(&t);
            assert_eq!(w.is_some(), r >= 4, "{dims:?}");
            if let Some(w) = w {
                assert_eq!(w.s, vec![1, 2], "{dims:?}");
                assert_eq!(w.product.subset().len(), r);
            }
        }
    }
}

#[test]
fn omega_witness_for_every_r() {
    for r in 2..=8 {
        for dims in all_tuples(r, 3) {
            let w = omega_nontriviality(&SphereTuple::new(dims.clone()).unwrap()).expect("witness");
            assert_eq!(w.s, vec![1]);
            assert_eq!(w.t, (2..=r).collect::<Vec<_>>());
        }
    }
}
