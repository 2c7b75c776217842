// transfer of one-parameter subgroup data between the toric slice and the
// full embedding, and the agreement of the two cellularity verdicts.
//
// the toroidal-side verdict is the conjunction of the orientation report and
// the toric verdict at the transferred-back vector; it must agree with the
// toric verdict at the original vector. the rank-two chamber over the type
// A2 coroot lattice is the honest negative case: its chamber cone has index
// three, so the quotient is singular and both sides report false.

use kring::fan::{self, Cone, Fan};
use kring::toroidal;
use kring::weyl::{self, RootDatum, WeylGroup};

fn chamber(name: &str) -> (WeylGroup, Fan) {
    let g = weyl::weyl_group(RootDatum::named(name, 0).unwrap()).unwrap();
    let f = toroidal::wonderful_ring(&g).unwrap();
    (g, f)
}

fn subdivided(name: &str, cones: &[&[&[i64]]]) -> (WeylGroup, Fan) {
    let g = weyl::weyl_group(RootDatum::named(name, 0).unwrap()).unwrap();
    let n = g.datum.rank();
    let cones: Vec<Cone> = cones
        .iter()
        .map(|rays| Cone::new(n, rays.iter().map(|r| r.to_vec()).collect()).unwrap())
        .collect();
    (g, Fan::new(n, cones).unwrap())
}

fn instances() -> Vec<(&'static str, WeylGroup, Fan, Vec<i64>, bool)> {
    let (g1, f1) = chamber("A1");
    let (g2, f2) = chamber("A2");
    let (gb, fb) = chamber("B2");
    let (gx, fx) = subdivided("A1xA1", &[&[&[1, 0], &[1, 1]], &[&[1, 1], &[0, 1]]]);
    let (gs, fs) = subdivided("A2", &[&[&[2, 1], &[1, 1]], &[&[1, 1], &[1, 2]]]);
    vec![
        ("rank one", g1, f1, vec![1], true),
        // chamber cone generated by (1,2) and (2,1): index three, singular
        ("rank two full chamber", g2, f2, vec![2, 3], false),
        ("rank two type B", gb, fb, vec![2, 3], true),
        ("product subdivision", gx, fx, vec![1, 2], true),
        ("rank two subdivision", gs, fs, vec![2, 3], true),
    ]
}

#[test]
fn transferred_verdicts_agree() {
    for (name, g, fan_plus, nu0, expected) in instances() {
        let (full, _) = weyl::orbit_fan(&g, &fan_plus).unwrap();
        let toric = fan::cellularity_report(&full, &nu0).unwrap();
        assert_eq!(toric.verdict, expected, "{name}: toric verdict");

        let (nu1, nu2) = toroidal::transfer_psg_to_toroidal(&g, &full, &nu0, None).unwrap();
        let tg = toroidal::toroidal_gkm_graph(&g, &fan_plus).unwrap();
        let rep = toroidal::orientation_check(&g, &tg, &nu1, &nu2).unwrap();

        let back = toroidal::transfer_psg_to_toric(&g, &nu1, &nu2);
        // the transferred subgroup is a bounded perturbation of the scaled
        // original, so it selects the same cells
        assert!(
            fan::psg_perturbation(&full, &nu1, &back).unwrap(),
            "{name}: transferred vector drifts past the perturbation bound"
        );
        let scaled = fan::cellularity_report(&full, &nu1).unwrap();
        assert_eq!(scaled.cells, toric.cells, "{name}: scaling changes cells");
        let returned = fan::cellularity_report(&full, &back).unwrap();
        assert_eq!(returned, scaled, "{name}: round trip changes the report");

        let toroidal_verdict = rep.ok && returned.verdict;
        assert_eq!(toroidal_verdict, toric.verdict, "{name}: verdicts disagree");
        // cellularity downstairs forces the clean orientation upstairs
        if toric.verdict {
            assert!(rep.ok, "{name}: cellular but orientation signals fail");
        }
    }
}

#[test]
fn strong_genericity_is_stricter_than_regularity() {
    // (1,1) is regular for the rank-two group but pairs to zero with a dual
    // semigroup generator of an orbit cone, so the transfer rejects it
    let (g, fan_plus) = chamber("A2");
    let (full, _) = weyl::orbit_fan(&g, &fan_plus).unwrap();
    let err = toroidal::transfer_psg_to_toroidal(&g, &full, &[1, 1], None).unwrap_err();
    assert!(matches!(err, toroidal::ToroidalError::NonGenericPsg { .. }));
}
