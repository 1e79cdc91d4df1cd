//! Minimal SVG rendering of grid-world paths: a cell grid, the input path in
//! bold, and sampled paths as translucent overlays.

const CELL: usize = 28;
const MARGIN: usize = 14;

fn polyline(cells: &[(usize, usize)], style: &str) -> String {
    let points: Vec<String> = cells
        .iter()
        .map(|&(row, col)| {
            format!(
                "{},{}",
                MARGIN + col * CELL + CELL / 2,
                MARGIN + row * CELL + CELL / 2
            )
        })
        .collect();
    format!(
        "  <polyline fill=\"none\" {} points=\"{}\"/>\n",
        style,
        points.join(" ")
    )
}

pub fn render_paths(input: Option<&[(usize, usize)]>, samples: &[Vec<(usize, usize)>]) -> String {
    let mut rows = 1;
    let mut cols = 1;
    let mut bump = |cells: &[(usize, usize)]| {
        for &(r, c) in cells {
            rows = rows.max(r + 1);
            cols = cols.max(c + 1);
        }
    };
    if let Some(cells) = input {
        bump(cells);
    }
    for cells in samples {
        bump(cells);
    }
    let width = cols * CELL + 2 * MARGIN;
    let height = rows * CELL + 2 * MARGIN;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    );
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    for r in 0..=rows {
        let y = MARGIN + r * CELL;
        svg.push_str(&format!(
            "  <line x1=\"{MARGIN}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#dddddd\"/>\n",
            MARGIN + cols * CELL
        ));
    }
    for c in 0..=cols {
        let x = MARGIN + c * CELL;
        svg.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{MARGIN}\" x2=\"{x}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            MARGIN + rows * CELL
        ));
    }
    for cells in samples {
        svg.push_str(&polyline(
            cells,
            "stroke=\"#e06060\" stroke-width=\"2\" stroke-opacity=\"0.45\"",
        ));
    }
    if let Some(cells) = input {
        svg.push_str(&polyline(cells, "stroke=\"#2040c0\" stroke-width=\"3\""));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_a_valid_document() {
        let input = vec![(0, 0), (0, 1), (1, 1)];
        let samples = vec![vec![(0, 0), (1, 0), (1, 1)]];
        let svg = render_paths(Some(&input), &samples);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
