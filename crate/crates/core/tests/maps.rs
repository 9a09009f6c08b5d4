//! The shipped stand-in maps are the procedural generator's output with ten
//! targets. `SUBMDP_BLESS=1 cargo test --test maps` rewrites them.

use std::path::PathBuf;

use submdp::env::{build_nav, procedural_map, read_map, render_map};

fn map_path(v: u64) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../maps/nav_{v}.txt"))
}

#[test]
fn shipped_maps_match_the_generator() {
    for v in 1..=3 {
        let map = procedural_map(v).with_random_targets(10, v).unwrap();
        let text = format!(
            "; procedural stand-in map {v}, 21x21, 10 targets\n{}",
            render_map(&map)
        );
        let path = map_path(v);
        if std::env::var_os("SUBMDP_BLESS").is_some() {
            std::fs::write(&path, &text).unwrap();
        }
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            text,
            "{}",
            path.display()
        );
        let shipped = read_map(&path).unwrap();
        assert_eq!(shipped, map);
        let (mdp, obj) = build_nav(&shipped, 1e-5).unwrap();
        assert!(mdp.validate().is_empty());
        assert_eq!(obj.dim(), 10);
    }
}
