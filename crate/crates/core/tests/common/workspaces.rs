//! Random workspaces built through the public mutation API.

use base64::Engine;
use phoenix_core::workspace::{MarkupPath, Point, Rgba, Size, Workspace};
use rand::seq::SliceRandom;
use rand::Rng;

use super::exprs::expr;

pub fn random_path(rng: &mut impl Rng) -> MarkupPath {
    let n = rng.gen_range(2..8);
    let (cx, cy) = (rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
    let points = (0..n).map(|_| Point::new(cx + rng.gen_range(-60.0..60.0), cy + rng.gen_range(-60.0..60.0))).collect();
    let color = Rgba { r: rng.gen(), g: rng.gen(), b: rng.gen(), a: 255 };
    MarkupPath::new(points, color, rng.gen_range(0.5..6.0)).unwrap()
}

pub fn random_workspace(rng: &mut impl Rng, nodes: usize) -> Workspace {
    let mut ws = Workspace::new(format!("generated {}", rng.gen::<u16>()));
    let mut ids = Vec::new();
    for _ in 0..nodes {
        let parent = if ids.is_empty() || rng.gen_bool(0.3) { None } else { ids.choose(rng).copied() };
        let id = ws.add_node(Point::new(rng.gen_range(0.0..2000.0), rng.gen_range(0.0..2000.0)), parent).unwrap();
        ids.push(id);
        for _ in 0..rng.gen_range(0..4) {
            let e = ws.add_equation(id, expr(rng, 4), None).unwrap();
            if rng.gen_bool(0.3) {
                ws.set_annotation(e, Some("simplify both sides".into())).unwrap();
            }
        }
        for _ in 0..rng.gen_range(0..3) {
            ws.add_markup(id, random_path(rng)).unwrap();
        }
        if rng.gen_bool(0.2) {
            let bytes: Vec<u8> = (0..rng.gen_range(1..64)).map(|_| rng.gen()).collect();
            let data = base64::engine::general_purpose::STANDARD.encode(bytes);
            ws.add_image(id, "image/png", &data, Point::new(10.0, 10.0), Size { w: 64.0, h: 48.0 }).unwrap();
        }
    }
    for _ in 0..nodes / 2 {
        let (a, b) = (*ids.choose(rng).unwrap(), *ids.choose(rng).unwrap());
        let _ = ws.link_nodes(a, b);
    }
    ws
}
