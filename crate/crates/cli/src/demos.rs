//! Bundled problem documents.

const DEMOS: &[(&str, &str)] = &[
    ("flat-symplectic", include_str!("../demos/flat-symplectic.json")),
    ("abelian", include_str!("../demos/abelian.json")),
    ("aff1", include_str!("../demos/aff1.json")),
    ("su2-obstruction", include_str!("../demos/su2-obstruction.json")),
    ("kahler-flat", include_str!("../demos/kahler-flat.json")),
    ("kahler-fubini-like", include_str!("../demos/kahler-fubini-like.json")),
    ("kahler-quadratic", include_str!("../demos/kahler-quadratic.json")),
];

pub fn names() -> Vec<&'static str> {
    DEMOS.iter().map(|(n, _)| *n).collect()
}

pub fn demo_spec(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
