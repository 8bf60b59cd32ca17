use proptest::prelude::*;

use conepersist::arrangement::CellComplex;
use conepersist::doc::{module_from_doc, module_to_doc, Document};
use conepersist::interleave::hom_basis;
use conepersist::persist::{
    common_pair, direct_sum, point_module, principal_module, random_module, shift, smoothing, ArrModule, ModMorphism,
    RandomSpec,
};
use conepersist::rat::{rvec, vadd, RVec, Rat};
use conepersist::sites::{
    alpha_star, alpha_star_morphism, beta_inv, beta_inv_morphism, beta_star, beta_star_morphism, is_ephemeral,
    GammaModule,
};

fn spec(plane: bool) -> RandomSpec {
    if plane {
        RandomSpec::plane()
    } else {
        RandomSpec::line()
    }
}

fn arb_module() -> impl Strategy<Value = ArrModule> {
    (any::<u64>(), any::<bool>()).prop_map(|(s, plane)| random_module(s, &spec(plane)))
}

fn quarter() -> impl Strategy<Value = Rat> {
    (-12i64..=12).prop_map(|n| Rat::new(n, 4))
}

fn nonneg_quarter() -> impl Strategy<Value = Rat> {
    (0i64..=12).prop_map(|n| Rat::new(n, 4))
}

fn vec_of(n: usize, x: Rat) -> RVec {
    vec![x; n]
}

/// Sample points: every cell representative.
fn samples(f: &ArrModule) -> Vec<RVec> {
    let c = f.complex();
    c.cells().map(|a| c.representative(&a)).collect()
}

/// Combination of a hom basis with the given coefficients.
fn endo(f: &ArrModule, coeffs: &[u32]) -> ModMorphism {
    let mut comps = ModMorphism::zero(f, f).unwrap().components().to_vec();
    for (e, &s) in hom_basis(f, f).iter().zip(coeffs.iter().cycle()) {
        for (c, m) in comps.iter_mut().zip(e) {
            *c = c.add(&m.scale(s % f.p()));
        }
    }
    ModMorphism::checked(f.clone(), f.clone(), comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_modules_are_functors(f in arb_module()) {
        prop_assert!(f.validate().is_ok());
        let pts = samples(&f);
        let cone = f.complex().cone().clone();
        for x in &pts {
            for y in &pts {
                if !cone.leq(x, y).unwrap() {
                    continue;
                }
                prop_assert!(f.structure_map(x, x).unwrap().is_identity());
                for z in &pts {
                    if cone.leq(y, z).unwrap() {
                        let direct = f.structure_map(z, x).unwrap();
                        let via = f.structure_map(y, x).unwrap().mul(&f.structure_map(z, y).unwrap());
                        prop_assert_eq!(direct, via);
                    }
                }
            }
        }
    }

    #[test]
    fn refinement_preserves_values(f in arb_module(), g in arb_module()) {
        prop_assume!(f.complex().dim() == g.complex().dim());
        let (a, _) = common_pair(&f, &g).unwrap();
        prop_assert!(a.validate().is_ok());
        for x in samples(&a) {
            prop_assert_eq!(a.value_at(&x).unwrap(), f.value_at(&x).unwrap());
        }
    }

    #[test]
    fn shifts_add(f in arb_module(), s in quarter(), t in quarter()) {
        let n = f.complex().dim();
        let (u, v) = (vec_of(n, s), vec_of(n, t));
        let twice = shift(&shift(&f, &u).unwrap(), &v).unwrap();
        prop_assert_eq!(&twice, &shift(&f, &vadd(&u, &v)).unwrap());
        let back = shift(&shift(&f, &u).unwrap(), &u.iter().map(|x| -x).collect::<RVec>()).unwrap();
        prop_assert_eq!(back, f);
    }

    // χ_{u,w} ∘ χ_{v,u} = χ_{v,w} for w <= u <= v
    #[test]
    fn smoothings_compose(f in arb_module(), w in quarter(), a in nonneg_quarter(), b in nonneg_quarter()) {
        let n = f.complex().dim();
        let (w, u) = (vec_of(n, w.clone()), vec_of(n, &w + &a));
        let v = vec_of(n, &(&w[0] + &a) + &b);
        let first = smoothing(&f, &v, &u).unwrap();
        let second = smoothing(&f, &u, &w).unwrap();
        let whole = smoothing(&f, &v, &w).unwrap();
        let r = CellComplex::refine_all([first.complex(), second.complex(), whole.complex()]).unwrap();
        let comp = second.refine_to(&r).unwrap().after(&first.refine_to(&r).unwrap()).unwrap();
        prop_assert_eq!(comp, whole.refine_to(&r).unwrap());
        let id = smoothing(&f, &v, &v).unwrap();
        prop_assert_eq!(id, ModMorphism::identity(&shift(&f, &v).unwrap()));
    }

    #[test]
    fn site_functors_respect_composition(f in arb_module(), c1 in prop::collection::vec(0u32..2, 1..6),
                                         c2 in prop::collection::vec(0u32..2, 1..6)) {
        let (x, y) = (endo(&f, &c1), endo(&f, &c2));
        let xy = y.after(&x).unwrap();
        let bx = beta_star_morphism(&x);
        let by = beta_star_morphism(&y);
        prop_assert_eq!(beta_star_morphism(&xy), by.after(&bx).unwrap());
        prop_assert_eq!(beta_inv_morphism(&xy), beta_inv_morphism(&by).after(&beta_inv_morphism(&bx)).unwrap());
        prop_assert_eq!(alpha_star_morphism(&xy), alpha_star_morphism(&by).after(&alpha_star_morphism(&bx)).unwrap());
        let id = ModMorphism::identity(&f);
        prop_assert_eq!(beta_star_morphism(&id), ModMorphism::identity(beta_star(&f).module()));
    }

    #[test]
    fn site_functor_identities(f in arb_module()) {
        let g = beta_star(&f);
        prop_assert_eq!(&beta_star(&alpha_star(&g)), &g);
        prop_assert_eq!(&beta_star(&beta_inv(&g)), &g);
        prop_assert_eq!(&beta_star(g.module()), &g);
        prop_assert!(alpha_star(&g).validate().is_ok());
    }

    #[test]
    fn documents_round_trip(f in arb_module()) {
        let d = module_to_doc(&f);
        prop_assert_eq!(&module_from_doc(&d).unwrap(), &f);
        let doc = Document::arr_module(&f);
        let back = Document::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(&back, &doc);
        back.validate().unwrap();
        let g = beta_star(&f);
        let gd = Document::gamma_module(&g);
        prop_assert_eq!(Document::from_json(&gd.to_json()).unwrap(), gd);
    }
}

#[test]
fn point_modules_are_ephemeral_principals_are_not() {
    let c = CellComplex::line(&rvec(&[0, 2]));
    let pt = point_module(&c, &rvec(&[0]), 2).unwrap();
    let pr = principal_module(&c, &rvec(&[2]), 2).unwrap();
    assert!(is_ephemeral(&pt));
    assert!(!is_ephemeral(&pr));
    assert!(beta_star(&pt).is_zero());
    let sum = direct_sum(&pt, &pr).unwrap();
    assert_eq!(beta_star(&sum), beta_star(&pr));
    assert!(GammaModule::new(pt).is_err());
}

#[test]
fn malformed_documents_are_rejected() {
    let c = CellComplex::line(&rvec(&[0]));
    let f = principal_module(&c, &rvec(&[0]), 2).unwrap();
    let json = Document::arr_module(&f).to_json();
    assert!(Document::from_json(&json.replace("\"field\": 2", "\"field\": 4")).unwrap().validate().is_err());
    assert!(Document::from_json(&json.replace("\"version\": \"1\"", "\"version\": \"9\"")).is_err());
    assert!(Document::from_json(&json.replace("\"axes\"", "\"axis\"")).is_err());
    assert!(Document::from_json("{").is_err());
}
