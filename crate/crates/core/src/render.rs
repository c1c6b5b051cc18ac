//! Level pictures: ASCII text and binary PPM images, single or as a
//! left-to-right strip.

use std::io::{self, Write};

use crate::game::{Level, Tile};
use crate::poet::Poet;

pub fn tile_color(tile: Tile) -> [u8; 3] {
    match tile {
        Tile::Floor => [224, 216, 192],
        Tile::Wall => [80, 80, 88],
        Tile::Avatar => [40, 120, 220],
        Tile::Key => [240, 200, 40],
        Tile::Door => [140, 80, 30],
        Tile::Monster => [200, 40, 40],
        Tile::Coin => [250, 170, 20],
        Tile::Enemy => [170, 30, 150],
    }
}

const GAP_COLOR: [u8; 3] = [255, 255, 255];

/// RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        Image {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    fn fill_rect(&mut self, x0: usize, y0: usize, w: usize, h: usize, c: [u8; 3]) {
        for y in y0..y0 + h {
            self.pixels[y * self.width + x0..y * self.width + x0 + w].fill(c);
        }
    }

    /// Binary `P6` encoding.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        w.write_all(&bytes)
    }
}

/// Each tile becomes a `scale`×`scale` block of its colour.
pub fn level_image(level: &Level, scale: usize) -> Image {
    let scale = scale.max(1);
    let mut img = Image::new(level.width() * scale, level.height() * scale, GAP_COLOR);
    for (p, tile) in level.iter() {
        img.fill_rect(p.x as usize * scale, p.y as usize * scale, scale, scale, tile_color(tile));
    }
    img
}

/// Panels side by side, separated by `gap` pixels of white, top-aligned.
pub fn strip_image(levels: &[&Level], scale: usize, gap: usize) -> Image {
    let panels: Vec<Image> = levels.iter().map(|l| level_image(l, scale)).collect();
    let width = panels.iter().map(|p| p.width).sum::<usize>() + gap * panels.len().saturating_sub(1);
    let height = panels.iter().map(|p| p.height).max().unwrap_or(0);
    let mut img = Image::new(width, height, GAP_COLOR);
    let mut x0 = 0;
    for p in &panels {
        for y in 0..p.height {
            img.pixels[y * width + x0..y * width + x0 + p.width]
                .copy_from_slice(&p.pixels[y * p.width..(y + 1) * p.width]);
        }
        x0 += p.width + gap;
    }
    img
}

/// Text panels side by side, each under its caption.
pub fn ascii_strip(levels: &[&Level], captions: &[String]) -> String {
    let gap = "  ";
    let widths: Vec<usize> = levels
        .iter()
        .zip(captions)
        .map(|(l, c)| l.width().max(c.chars().count()))
        .collect();
    let rendered: Vec<Vec<String>> = levels
        .iter()
        .map(|l| l.render().lines().map(str::to_string).collect())
        .collect();
    let rows = rendered.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let line = |cells: Vec<String>| cells.join(gap).trim_end().to_string() + "\n";
    out += &line(
        captions
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect(),
    );
    for r in 0..rows {
        out += &line(
            rendered
                .iter()
                .zip(&widths)
                .map(|(panel, &w)| format!("{:<w$}", panel.get(r).map_or("", String::as_str)))
                .collect(),
        );
    }
    out
}

/// Pair ids along the lineage ending at `leaf`, ordered by creation loop
/// (then id), so parents come before children.
pub fn lineage_panels(archive: &Poet, leaf: u64) -> Vec<u64> {
    let mut ids = archive.ancestry(leaf);
    ids.sort_by_key(|&id| {
        let p = archive.pair(id).expect("ancestry ids exist");
        (p.created_loop, p.id)
    });
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameVariant;
    use crate::seeds::seed_level;

    #[test]
    fn ppm_header_and_size() {
        let level = seed_level(GameVariant::DZeldaSingleDoor);
        let img = level_image(&level, 4);
        let mut bytes = Vec::new();
        img.write_ppm(&mut bytes).unwrap();
        let header = format!("P6\n{} {}\n255\n", 13 * 4, 9 * 4);
        assert!(bytes.starts_with(header.as_bytes()));
        assert_eq!(bytes.len(), header.len() + 13 * 4 * 9 * 4 * 3);
        assert_eq!(img.get(0, 0), tile_color(Tile::Wall));
    }

    #[test]
    fn strip_places_panels_left_to_right() {
        let a = seed_level(GameVariant::DZeldaSingleDoor);
        let b = seed_level(GameVariant::DZeldaMultiDoor);
        let img = strip_image(&[&a, &b, &a], 1, 2);
        assert_eq!((img.width, img.height), (13 * 3 + 4, 9));
        assert_eq!(img.get(13, 0), GAP_COLOR);
        assert_eq!(img.get(15, 0), tile_color(Tile::Wall));
    }
}
