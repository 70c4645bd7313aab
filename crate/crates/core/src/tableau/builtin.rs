//! Built-in pair registry: five pairs compiled in from their exact
//! coefficients, plus five literature pairs shipped as data files.

use crate::scalar::{ratio, Rational};
use crate::stage::{zero_matrix, StageVec};
use crate::tableau::{format, AnyPair, ButcherPair, Interpolant, TableauError};

macro_rules! rvec {
    ($(($n:expr, $d:expr)),* $(,)?) => {
        [$(ratio::<Rational>($n, $d)),*]
    };
}

const DATA_FILES: [(&str, &str); 5] = [
    ("fehlberg", include_str!("../../data/fehlberg.rktab")),
    ("cash-karp", include_str!("../../data/cash-karp.rktab")),
    ("dopri", include_str!("../../data/dopri.rktab")),
    ("tsitouras", include_str!("../../data/tsitouras.rktab")),
    (
        "bogacki-shampine",
        include_str!("../../data/bogacki-shampine.rktab"),
    ),
];

/// Names accepted by [`builtin`], constructed pairs first.
pub fn builtin_names() -> Vec<&'static str> {
    let mut names = vec![
        "typeB",
        "aprime",
        "bprime-c3-0",
        "bprime-c3-c2",
        "sqrt4054",
    ];
    names.extend(DATA_FILES.iter().map(|(n, _)| *n));
    names
}

/// Looks up a pair by name. Exact pairs come back in rational mode; the
/// irrational-node pair (`sqrt4054`) and decimal literature data are float.
pub fn builtin(name: &str) -> Result<AnyPair, TableauError> {
    match name {
        "typeB" => Ok(AnyPair::Rational(type_b())),
        "aprime" => Ok(AnyPair::Rational(a_prime())),
        "bprime-c3-0" => Ok(AnyPair::Rational(b_prime_c3_zero())),
        "bprime-c3-c2" => Ok(AnyPair::Rational(b_prime_c3_eq_c2())),
        "sqrt4054" => Ok(AnyPair::Float(sqrt4054())),
        _ => match DATA_FILES.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => {
                let (pair, warnings) = format::load_str(text)?;
                debug_assert!(warnings.is_empty(), "{name}: {warnings:?}");
                Ok(pair)
            }
            None => Err(TableauError::UnknownPair {
                name: name.to_string(),
                available: builtin_names().iter().map(|s| s.to_string()).collect(),
            }),
        },
    }
}

fn with_fsal_row(
    name: &str,
    family: &str,
    source: &str,
    c: StageVec<Rational>,
    rows: &[&[Rational]],
    b: StageVec<Rational>,
    d: StageVec<Rational>,
) -> ButcherPair<Rational> {
    let mut a = zero_matrix::<Rational>();
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[i + 1][j] = v.clone();
        }
    }
    for j in 0..7 {
        a[6][j] = b[j].clone();
    }
    ButcherPair {
        name: name.to_string(),
        family: family.to_string(),
        source: source.to_string(),
        c,
        a,
        b,
        d,
        interpolant: None,
        fsal: true,
    }
}

/// Six-stage pair of type B, nodes (1/6, 7/32, 33/68, 3/4, 7/8).
fn type_b() -> ButcherPair<Rational> {
    with_fsal_row(
        "typeB",
        "B",
        "derived: type B family at c2=1/6, c3=7/32, c5=3/4, c6=7/8",
        rvec![(0, 1), (1, 6), (7, 32), (33, 68), (3, 4), (7, 8), (1, 1)],
        &[
            &rvec![(1, 6)],
            &rvec![(67, 512), (45, 512)],
            &rvec![(224787, 903992), (-1233765, 903992), (180960, 112999)],
            &rvec![
                (921, 3496),
                (-552447, 1136200),
                (125664, 316825),
                (103173, 179075)
            ],
            &rvec![
                (13, 13984),
                (-5604237, 49992800),
                (2246076, 3485075),
                (-1822723, 189103200),
                (371, 1056)
            ],
        ],
        rvec![
            (1, 9),
            (-59508, 193375),
            (2281472, 3882375),
            (1920983, 7492875),
            (437, 5355),
            (76912, 283815),
            (0, 1)
        ],
        rvec![
            (0, 1),
            (2349, 700),
            (-832, 175),
            (83521, 31800),
            (-377, 168),
            (377, 371),
            (0, 1)
        ],
    )
}

/// Type A' pair with a 4th-order continuously differentiable interpolant.
fn a_prime() -> ButcherPair<Rational> {
    let mut pair = with_fsal_row(
        "aprime",
        "Aprime",
        "derived: type A' family at c2=1/5, c3=21/65, c4=9/10, c5=39/40",
        rvec![(0, 1), (1, 5), (21, 65), (9, 10), (39, 40), (1, 1), (1, 1)],
        &[
            &rvec![(1, 5)],
            &rvec![(21, 338), (441, 1690)],
            &rvec![(639, 392), (-729, 140), (1755, 392)],
            &rvec![
                (4878991, 1693440),
                (-16601, 1792),
                (210067, 28224),
                (-1469, 17280)
            ],
            &rvec![
                (13759919, 4230954),
                (-2995, 287),
                (507312091, 61294590),
                (-22, 405),
                (-7040, 180687)
            ],
        ],
        rvec![
            (1441, 14742),
            (0, 1),
            (114244, 234927),
            (118, 81),
            (-12800, 4407),
            (41, 22),
            (0, 1)
        ],
        rvec![
            (-1, 273),
            (0, 1),
            (2197, 174020),
            (-4, 15),
            (1280, 1469),
            (-33743, 52712),
            (127, 4792)
        ],
    );
    pair.interpolant = Some(Interpolant {
        beta: [
            rvec![(1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
            rvec![
                (-4489, 1638),
                (0, 1),
                (35152, 8701),
                (-118, 9),
                (48000, 1469),
                (-246, 11),
                (3, 2)
            ],
            rvec![
                (21170, 7371),
                (0, 1),
                (-1441232, 234927),
                (2596, 81),
                (-339200, 4407),
                (574, 11),
                (-4, 1)
            ],
            rvec![
                (-2540, 2457),
                (0, 1),
                (202124, 78309),
                (-472, 27),
                (60800, 1469),
                (-615, 22),
                (5, 2)
            ],
        ],
    });
    pair
}

/// Type B' pair on the c3 = 0 slice.
fn b_prime_c3_zero() -> ButcherPair<Rational> {
    with_fsal_row(
        "bprime-c3-0",
        "Bprime-c3-0",
        "derived: type B' (c3=0) at c2=4/15, c4=1/2, c5=4/5",
        rvec![(0, 1), (4, 15), (0, 1), (1, 2), (4, 5), (1, 1), (1, 1)],
        &[
            &rvec![(4, 15)],
            &rvec![(6, 7), (-6, 7)],
            &rvec![(-11, 384), (21, 32), (-49, 384)],
            &rvec![(4, 75), (-6, 35), (14, 75), (128, 175)],
            &rvec![
                (81, 224),
                (4917, 1568),
                (-33, 32),
                (-132, 49),
                (275, 224)
            ],
        ],
        rvec![
            (41, 384),
            (3375, 9856),
            (-7, 384),
            (4, 21),
            (125, 384),
            (7, 132),
            (0, 1)
        ],
        rvec![
            (1, 40),
            (405, 616),
            (-7, 40),
            (-32, 35),
            (5, 8),
            (-56, 55),
            (4, 5)
        ],
    )
}

/// Type B' pair on the c3 = c2 slice. The difference weights here are the
/// exact null vector of the order-4 condition matrix for this tableau.
fn b_prime_c3_eq_c2() -> ButcherPair<Rational> {
    with_fsal_row(
        "bprime-c3-c2",
        "Bprime-c3-c2",
        "derived: type B' (c3=c2) at c2=1/4, c5=4/5, c'3=1/5",
        rvec![(0, 1), (1, 4), (1, 4), (1, 3), (4, 5), (1, 1), (1, 1)],
        &[
            &rvec![(1, 4)],
            &rvec![(-11, 20), (4, 5)],
            &rvec![(1, 9), (43, 216), (5, 216)],
            &rvec![(66, 125), (-593, 250), (-19, 50), (378, 125)],
            &rvec![(-7, 2), (151, 8), (25, 8), (-135, 7), (25, 14)],
        ],
        rvec![
            (5, 48),
            (0, 1),
            (0, 1),
            (27, 56),
            (125, 336),
            (1, 24),
            (0, 1)
        ],
        rvec![
            (11, 8),
            (-9, 1),
            (-5, 3),
            (297, 28),
            (-125, 56),
            (-1, 12),
            (1, 1)
        ],
    )
}

/// Node of the irrational type B' pair: `c5 = 3 (8 sqrt(4054) - 431) / 289`.
pub fn sqrt4054_c5() -> f64 {
    3.0 * (8.0 * 4054f64.sqrt() - 431.0) / 289.0
}

/// Type B' pair with c2 = 1/5, c3 = 1/4, c'3 = 1/40, c4 = 3/5 evaluated from
/// its closed forms at the given c5 (float only: the node is irrational).
pub fn sqrt4054_at(c5: f64) -> ButcherPair<f64> {
    let mut a = zero_matrix::<f64>();
    a[1][0] = 0.2;
    a[2][0] = 0.125;
    a[2][1] = 0.125;
    a[3][0] = 141.0 / 575.0;
    a[3][1] = -228.0 / 115.0;
    a[3][2] = 1344.0 / 575.0;
    a[4][0] = -c5 * (860.0 * c5.powi(3) - 1077.0 * c5 * c5 + 379.0 * c5 - 48.0)
        / (3.0 * (39.0 * c5 - 5.0));
    a[4][1] = c5 * (5.0 * c5 - 1.0) * (1340.0 * c5 * c5 - 1367.0 * c5 + 277.0)
        / (2.0 * (39.0 * c5 - 5.0));
    a[4][2] = -16.0 * c5 * (5.0 * c5 - 1.0) * (4.0 * c5 - 1.0) * (73.0 * c5 - 55.0)
        / (7.0 * (39.0 * c5 - 5.0));
    a[4][3] = 115.0 * c5 * (5.0 * c5 - 1.0) * (4.0 * c5 - 1.0) * (5.0 * c5 - 3.0)
        / (42.0 * (39.0 * c5 - 5.0));
    a[5][0] = (113.0 * c5 * c5 - 35.0 * c5 - 40.0) / (c5 * (285.0 - 319.0 * c5));
    a[5][1] = -4.0 * (2845.0 * c5 * c5 - 2999.0 * c5 + 654.0)
        / ((5.0 * c5 - 1.0) * (285.0 - 319.0 * c5));
    a[5][2] = 384.0 * (168.0 * c5 * c5 - 193.0 * c5 + 52.0)
        / (7.0 * (4.0 * c5 - 1.0) * (285.0 - 319.0 * c5));
    a[5][3] = -460.0 * (35.0 * c5 * c5 - 55.0 * c5 + 22.0)
        / (7.0 * (5.0 * c5 - 3.0) * (285.0 - 319.0 * c5));
    a[5][4] = 24.0 * (1.0 - c5) * (39.0 * c5 - 5.0)
        / (c5 * (5.0 * c5 - 1.0) * (4.0 * c5 - 1.0) * (5.0 * c5 - 3.0) * (285.0 - 319.0 * c5));
    let b = [
        (31.0 * c5 - 5.0) / (288.0 * c5),
        -125.0 * (3.0 - c5) / (768.0 * (5.0 * c5 - 1.0)),
        8.0 * (7.0 * c5 + 3.0) / (63.0 * (4.0 * c5 - 1.0)),
        2875.0 * (7.0 * c5 - 5.0) / (8064.0 * (5.0 * c5 - 3.0)),
        (39.0 * c5 - 5.0)
            / (96.0 * c5 * (5.0 * c5 - 1.0) * (4.0 * c5 - 1.0) * (5.0 * c5 - 3.0) * (1.0 - c5)),
        (285.0 - 319.0 * c5) / (2304.0 * (1.0 - c5)),
        0.0,
    ];
    let w = 43.0 * c5 - 33.0;
    let d = [
        5.0 * w / (216.0 * c5),
        175.0 * w / (288.0 * (5.0 * c5 - 1.0)),
        -152.0 * w / (189.0 * (4.0 * c5 - 1.0)),
        575.0 * w / (1512.0 * (5.0 * c5 - 3.0)),
        -(39.0 * c5 - 5.0) * w
            / (72.0 * c5 * (5.0 * c5 - 1.0) * (4.0 * c5 - 1.0) * (5.0 * c5 - 3.0) * (1.0 - c5)),
        -5.0 * (285.0 - 319.0 * c5) / (864.0 * (1.0 - c5)),
        1.0,
    ];
    for j in 0..7 {
        a[6][j] = b[j];
    }
    ButcherPair {
        name: "sqrt4054".to_string(),
        family: "Bprime".to_string(),
        source: "derived: general type B' at c2=1/5, c3=1/4, c'3=1/40, c4=3/5; c5 = 3(8*sqrt(4054)-431)/289".to_string(),
        c: [0.0, 0.2, 0.25, 0.6, c5, 1.0, 1.0],
        a,
        b,
        d,
        interpolant: None,
        fsal: true,
    }
}

fn sqrt4054() -> ButcherPair<f64> {
    sqrt4054_at(sqrt4054_c5())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn registry_lists_and_loads_everything() {
        for name in builtin_names() {
            let pair = builtin(name).unwrap();
            assert_eq!(pair.name(), name);
            assert!(
                pair.validate().is_empty(),
                "{name}: {:?}",
                pair.validate()
            );
        }
    }

    #[test]
    fn unknown_name_lists_available() {
        let err = builtin("nope").unwrap_err();
        match err {
            TableauError::UnknownPair { available, .. } => {
                assert!(available.contains(&"typeB".to_string()));
                assert_eq!(available.len(), 10);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn type_b_difference_row_as_printed() {
        let pair = builtin("typeB").unwrap();
        let p = pair.as_rational().unwrap();
        assert_eq!(p.d[0], ratio(0, 1));
        assert_eq!(p.d[1], ratio(2349, 700));
        assert_eq!(p.d[2], ratio(-832, 175));
    }

    #[test]
    fn bprime_c3_zero_entries() {
        let pair = builtin("bprime-c3-0").unwrap();
        let p = pair.as_rational().unwrap();
        assert_eq!(p.a[5][4], ratio(275, 224));
        assert_eq!(p.d[6], ratio(4, 5));
    }

    #[test]
    fn sqrt4054_nodes() {
        let pair = builtin("sqrt4054").unwrap();
        let p = match &pair {
            AnyPair::Float(p) => p,
            _ => panic!("sqrt4054 must be float mode"),
        };
        assert!((p.c[4] - 0.81351).abs() < 5e-6);
        assert!(!p.fsal || p.b[6] == 0.0);
    }

    #[test]
    fn bogacki_shampine_is_non_fsal() {
        let pair = builtin("bogacki-shampine").unwrap();
        assert!(!pair.fsal());
        let p = pair.as_rational().unwrap();
        assert!(!p.b[6].is_zero());
        assert_eq!(p.effective_stages(), 7);
    }
}
