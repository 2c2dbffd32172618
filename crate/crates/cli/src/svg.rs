//! SVG rendering of an instantiated floorplan.
//!
//! Blocks are labeled `<rect>` elements; the floorplan outline and the
//! dashed pin bounding box of each net are `<path>` elements, so the rect
//! count equals the block count. Layout y grows upward, SVG y downward, so
//! every y coordinate is flipped against the floorplan height.

use std::fmt::Write as _;

use multiplace::{Netlist, Point, SizeVector};

const PALETTE: [&str; 6] = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462"];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn render(netlist: &Netlist, coords: &[Point], sizes: &SizeVector, title: &str) -> String {
    let (fw, fh) = (netlist.floorplan_width(), netlist.floorplan_height());
    let flip = |y: f64| fh as f64 - y;
    let font = (fw.min(fh) as f64 / 40.0).max(1.0);
    let stroke = (fw.max(fh) as f64 / 400.0).max(0.1);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {fw} {fh}" width="{w}" height="{h}">"#,
        w = fw * 4,
        h = fh * 4
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    writeln!(
        s,
        r##"<path d="M0 0H{fw}V{fh}H0Z" fill="#ffffff" stroke="#000000" stroke-width="{stroke}"/>"##
    )
    .unwrap();
    for (i, block) in netlist.blocks().iter().enumerate() {
        let (p, z) = (coords[i], sizes[i]);
        let top = flip((p.y + z.h) as f64);
        writeln!(
            s,
            r##"<rect x="{}" y="{top}" width="{}" height="{}" fill="{}" stroke="#333333" stroke-width="{stroke}"/>"##,
            p.x,
            z.w,
            z.h,
            PALETTE[i % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="{font}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            p.x as f64 + z.w as f64 / 2.0,
            top + z.h as f64 / 2.0,
            escape(&block.name)
        )
        .unwrap();
    }
    for net in netlist.nets() {
        let pins: Vec<(f64, f64)> = net
            .pins
            .iter()
            .map(|pin| {
                let (p, z) = (coords[pin.block], sizes[pin.block]);
                (
                    p.x as f64 + pin.offset_x * z.w as f64,
                    flip(p.y as f64 + pin.offset_y * z.h as f64),
                )
            })
            .collect();
        let lx = pins.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hx = pins.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let ly = pins.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hy = pins.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            s,
            r##"<path d="M{lx} {ly}H{hx}V{hy}H{lx}Z" fill="none" stroke="#1f4e9c" stroke-width="{stroke}" stroke-dasharray="{d} {d}"/>"##,
            d = stroke * 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use multiplace::{Block, Net, Pin, Size};

    #[test]
    fn one_rect_per_block_and_flipped_y() {
        let blocks = vec![
            Block::new("a<1>", 2, 4, 2, 4).unwrap(),
            Block::new("b", 2, 4, 2, 4).unwrap(),
        ];
        let nets = vec![Net::new(vec![Pin::centered(0), Pin::centered(1)])];
        let n = Netlist::new(blocks, nets, 20, 10).unwrap();
        let coords = [Point::new(0, 0), Point::new(10, 6)];
        let sizes = SizeVector::new(vec![Size::new(4, 3), Size::new(2, 4)]);
        let svg = render(&n, &coords, &sizes, "t");
        assert_eq!(svg.matches("<rect").count(), 2);
        assert!(svg.contains(r#"<rect x="0" y="7" width="4" height="3""#));
        assert!(svg.contains(r#"<rect x="10" y="0" width="2" height="4""#));
        assert!(svg.contains("a&lt;1&gt;"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(r#"viewBox="0 0 20 10""#));
    }
}
