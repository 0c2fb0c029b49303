use qtern_core::model::ModelParams;
use qtern_core::oracle::{compare_spectra, radial_levels, OracleSettings, RadialProblem};
use qtern_core::rep::{self, scalar, QuadraticAlgebraCoeffs};
use qtern_core::scalar::{point, ParamRat, Rational, Symbol};
use qtern_core::spectrum::*;

fn params(mu: i64, mui: (i64, i64)) -> ModelParams {
    let r = Rational::new(mui.0, mui.1);
    ModelParams::rational(Rational::ONE, Rational::from_int(mu), r.clone(), r.clone(), r).unwrap()
}

#[test]
fn eigenvalues_agree_with_ladders() {
    let p = ModelParams::rational(
        Rational::new(2, 3),
        Rational::ONE,
        Rational::new(1, 3),
        Rational::new(3, 4),
        Rational::new(2, 5),
    )
    .unwrap();
    let bind = p.bindings();
    let a2b2 = QuadraticAlgebraCoeffs::a2b2().substitute(&bind).unwrap();
    let u1 = scalar("1/2 + (mu1 + mu2)/2").substitute(&bind).unwrap();
    let a1b1 = QuadraticAlgebraCoeffs::a1b1().substitute(&bind).unwrap();
    let v = rep::a1b1_offset().substitute(&bind).unwrap();
    for k in 0..6 {
        assert_eq!(a2_eigenvalue(k, &p), rep::ladder_value(&a2b2, &u1, k as i64).unwrap());
        assert_eq!(a1_eigenvalue(k, &p), rep::ladder_value(&a1b1, &v, k as i64).unwrap());
    }
}

#[test]
fn energies_are_the_representation_roots() {
    let m0 = [(Symbol::A2bar, rep::a2_value(&ParamRat::zero()))];
    for (mu, mui) in [(1, (1, 2)), (1, (3, 2)), (3, (1, 5))] {
        let p = params(mu, mui);
        let bind = p.bindings();
        let phi = rep::structure_poly(&QuadraticAlgebraCoeffs::a1b1(), &rep::k1_printed())
            .unwrap()
            .substitute(&m0)
            .unwrap()
            .substitute(&bind)
            .unwrap();
        let form =
            rep::a1b1_six_factors().substitute(&[(Symbol::M, ParamRat::zero())]).unwrap().substitute(&bind).unwrap();
        let v = rep::a1b1_offset().substitute(&bind).unwrap();
        let sample = point(&[(Symbol::E, Rational::new(-1, 1000))]);
        for q in 0..3u64 {
            let sols = rep::solve_representation(&phi, &form, q as u32, Symbol::E, &sample).unwrap();
            let roots: Vec<ParamRat> =
                sols.iter().filter(|s| s.u == v).filter_map(|s| s.constrained_symbol.clone()).map(|(_, e)| e).collect();
            for n in [2 * q, 2 * q + 1] {
                assert!(roots.contains(&energy(n, &p).unwrap()), "n = {n}: {roots:?}");
            }
        }
    }
}

#[test]
fn table_is_monotone_and_scales() {
    let t = spectrum_table(&params(1, (1, 2)), 8).unwrap();
    let es: Vec<Rational> = t.rows.iter().map(|r| exact(&r.energy).unwrap()).collect();
    assert_eq!(&es[..3], &[Rational::new(-1, 32), Rational::new(-1, 50), Rational::new(-1, 72)]);
    assert!(es.windows(2).all(|w| w[0] < w[1]) && es.last().unwrap().signum() < 0);
    // hydrogen series with N = n + 4
    for (n, e) in es.iter().enumerate() {
        assert_eq!(*e, Rational::new(-1, 2 * (n as i64 + 4).pow(2)));
    }
    let t2 = spectrum_table(&params(2, (1, 2)), 8).unwrap();
    for (a, b) in t.rows.iter().zip(&t2.rows) {
        assert_eq!(&a.energy * &ParamRat::from_int(4), b.energy);
    }
}

#[test]
fn oracle_levels() {
    let one = Rational::ONE;
    let rp = RadialProblem::for_level(Rational::from_int(3), one.clone(), one.clone(), 1, 19_999);
    let lv = radial_levels(&rp, 1, 1e-3).unwrap();
    assert!((lv.extrapolated[0] + 0.03125).abs() < 1e-4, "{lv:?}");
    let rp2 = RadialProblem { mu: Rational::from_int(2), r_max: &rp.r_max / &Rational::from_int(2), ..rp.clone() };
    let lv2 = radial_levels(&rp2, 1, 1e-3).unwrap();
    assert!((lv2.extrapolated[0] / lv.extrapolated[0] - 4.0).abs() < 4e-3);
}

#[test]
fn oracle_agrees_with_table() {
    for mui in [(1, 2), (3, 2)] {
        let t = spectrum_table(&params(1, mui), 2).unwrap();
        let rep = compare_spectra(&t, OracleSettings::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.rows.iter().all(|r| r.grid.n <= 20_000));
    }
    let mut empty = spectrum_table(&params(1, (1, 2)), 0).unwrap();
    empty.rows.clear();
    let rep = compare_spectra(&empty, OracleSettings::default()).unwrap();
    assert!(rep.pass && rep.rows.is_empty());
}
