use groupoid_kac::corpus::{corpus, pair2_weighted};
use groupoid_kac::format::{parse_groupoid_file, write_groupoid_file};
use groupoid_kac::groupoid::{Groupoid, Haar, Measure};
use groupoid_kac::Error;
use proptest::prelude::*;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{DATA}/{name}.groupoid")).unwrap()
}

fn parse_err(text: &str) -> (usize, usize, String) {
    match parse_groupoid_file(text) {
        Err(Error::Parse { line, col, msg }) => (line, col, msg),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

const Z2: &str = "groupoid-format 1
[units]
pt
[arrows]
e pt pt
a pt pt
[mult]
e e e
e a a
a e a
a a e
[inv]
e e
a a
[measure]
pt 1
";

#[test]
fn bundled_z2() {
    let m = parse_groupoid_file(&data("z2")).unwrap();
    let g = m.groupoid();
    assert_eq!((g.n_units(), g.n_arrows()), (1, 2));
    assert!(g.validate().pass());
    assert_eq!(m.haar().weights(), &[1.0, 1.0]);
}

#[test]
fn bundled_pair2_weighted() {
    let m = parse_groupoid_file(&data("pair2_weighted")).unwrap();
    let x = m.groupoid().arrow_index("(1,2)").unwrap();
    assert_eq!(m.d(x), 0.5);
    assert_eq!(m.mus(), &[1.0, 2.0]);
}

#[test]
fn bundled_files_match_the_builders() {
    let mut entries = corpus().unwrap();
    entries.push(pair2_weighted().unwrap());
    for e in entries {
        let m = parse_groupoid_file(&data(&e.name.replace('-', "_"))).unwrap();
        assert_eq!(m, e.measure, "{}", e.name);
    }
}

#[test]
fn hand_written_z2() {
    let m = parse_groupoid_file(Z2).unwrap();
    assert_eq!(m.groupoid().arrows(), &["e".to_string(), "a".to_string()]);
}

#[test]
fn comments_and_blank_lines() {
    let text = format!("\n# leading comment\n{}", Z2.replace("[inv]", "\n[inv]   # inverses\n"));
    assert!(parse_groupoid_file(&text).is_ok());
}

#[test]
fn missing_mult_entry_names_the_pair() {
    let (line, _, msg) = parse_err(&Z2.replace("a a e\n", ""));
    assert_eq!(line, 7);
    assert!(msg.contains("missing product for composable pair (a, a)"), "{msg}");
}

#[test]
fn header_is_required() {
    let (line, col, msg) = parse_err(&Z2.replace("groupoid-format 1", "groupoid-format 2"));
    assert_eq!((line, col), (1, 1));
    assert!(msg.contains("groupoid-format 1"));
}

#[test]
fn unknown_unit_is_located() {
    let (line, col, msg) = parse_err(&Z2.replace("a pt pt", "a pt qt"));
    assert_eq!((line, col), (6, 6));
    assert!(msg.contains("unknown unit \"qt\""));
}

#[test]
fn unknown_arrow_is_located() {
    let (line, col, _) = parse_err(&Z2.replace("e a a\n", "e b a\n"));
    assert_eq!((line, col), (9, 3));
}

#[test]
fn wrong_field_count() {
    let (line, col, msg) = parse_err(&Z2.replace("e e e\n", "e e e e\n"));
    assert_eq!((line, col), (8, 7));
    assert!(msg.contains("3 fields"));
}

#[test]
fn bad_measure_values() {
    let (line, col, _) = parse_err(&Z2.replace("pt 1", "pt 0"));
    assert_eq!((line, col), (16, 4));
    let (_, _, msg) = parse_err(&Z2.replace("pt 1", "pt one"));
    assert!(msg.contains("not a decimal"));
    let (_, _, msg) = parse_err(&Z2.replace("pt 1\n", ""));
    assert!(msg.contains("no measure for unit"));
}

#[test]
fn axiom_violation_names_the_triple() {
    // a·a = a breaks the identity law and associativity
    let (_, _, msg) = parse_err(&Z2.replace("a a e", "a a a"));
    assert!(msg.contains("groupoid axioms fail"), "{msg}");
    assert!(msg.contains("(a, a, a)") || msg.contains("for a"), "{msg}");
}

#[test]
fn duplicate_and_unknown_sections() {
    let (line, _, msg) = parse_err(&format!("{Z2}[units]\nq\n"));
    assert_eq!(line, 17);
    assert!(msg.contains("duplicate section"));
    let (_, _, msg) = parse_err(&format!("{Z2}[extra]\n"));
    assert!(msg.contains("unknown section"));
    let (_, _, msg) = parse_err(&Z2.replace("[inv]\ne e\na a\n", ""));
    assert!(msg.contains("missing section [inv]"));
}

#[test]
fn haar_section_is_validated() {
    let text = format!("{Z2}[haar]\ne 1\na 2\n");
    let (_, _, msg) = parse_err(&text);
    assert!(msg.contains("left"), "{msg}");
    let ok = format!("{Z2}[haar]\ne 2\na 2\n");
    assert_eq!(parse_groupoid_file(&ok).unwrap().haar().weights(), &[2.0, 2.0]);
}

fn measures() -> impl Strategy<Value = Measure> {
    let shapes = prop_oneof![
        (1usize..4).prop_map(|n| Groupoid::cyclic(n).unwrap()),
        (1usize..4).prop_map(|n| Groupoid::pair(n).unwrap()),
        Just(Groupoid::group_bundle(&[Groupoid::cyclic(2).unwrap(), Groupoid::cyclic(3).unwrap()]).unwrap()),
    ];
    (shapes, proptest::collection::vec(0.01f64..100.0, 3), 0.1f64..10.0).prop_map(|(g, mu, scale)| {
        let mu = (0..g.n_units()).map(|u| mu[u % mu.len()]).collect();
        let haar = Haar::new(&g, vec![scale; g.n_arrows()]).unwrap();
        Measure::new(&g, haar, mu).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_parse_is_identity(m in measures()) {
        let text = write_groupoid_file(&m);
        prop_assert_eq!(parse_groupoid_file(&text).unwrap(), m);
    }

    #[test]
    fn dropping_any_mult_line_is_an_error(k in 0usize..9) {
        let text = write_groupoid_file(&Measure::uniform(&Groupoid::cyclic(3).unwrap()));
        let lines: Vec<&str> = text.lines().collect();
        let start = lines.iter().position(|l| *l == "[mult]").unwrap() + 1;
        let dropped: Vec<&str> = lines[start + k].split(' ').collect();
        let kept: Vec<&str> = lines.iter().enumerate().filter(|(i, _)| *i != start + k).map(|(_, l)| *l).collect();
        let msg = match parse_groupoid_file(&kept.join("\n")) {
            Err(Error::Parse { msg, .. }) => msg,
            other => panic!("{other:?}"),
        };
        let expected = format!("({}, {})", dropped[0], dropped[1]);
        prop_assert!(msg.contains(&expected));
    }
}
