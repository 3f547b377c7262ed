//! Static SVG figures: sequence index plots, transition heatmaps and modal
//! plots. Every figure carries the same state legend.

use std::fmt::Write;

use reltraj::{ModalTrajectory, StateSymbol, Trajectory, TransitionMatrix};

/// Fill color of each state. Multi-letter states darken with the number of
/// letters; the two most complex states are fixed at gray and black.
pub fn state_color(s: StateSymbol) -> &'static str {
    match s.to_string().as_str() {
        "B" => "#40E0D0",
        "I" => "#2CA02C",
        "F" => "#7393B3",
        "T" => "#FF00FF",
        "BI" => "#2B9A65",
        "BF" => "#48949B",
        "BT" => "#805AB9",
        "IF" => "#407B59",
        "IT" => "#784078",
        "FT" => "#943BAE",
        "BIF" => "#808080",
        "BIT" => "#494D65",
        "BFT" => "#574A80",
        "IFT" => "#533D60",
        "BIFT" => "#000000",
        "X" => "#FF8C00",
        _ => "#FFFFFF",
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";
const LEGEND_WIDTH: f64 = 90.0;

struct Canvas {
    body: String,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        Canvas { body: String::new(), width, height }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, title: Option<&str>) {
        let _ = write!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\""
        );
        match title {
            Some(t) => {
                let _ = writeln!(self.body, "><title>{}</title></rect>", escape(t));
            }
            None => self.body.push_str("/>\n"),
        }
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        self.text_colored(x, y, anchor, s, "#000000");
    }

    fn text_colored(&mut self, x: f64, y: f64, anchor: &str, s: &str, color: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" fill=\"{color}\" {FONT}>{}</text>",
            escape(s)
        );
    }

    /// Unfilled frame, so white (Z) bands stay visible.
    fn frame(&mut self, x: f64, y: f64, w: f64, h: f64) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"none\" stroke=\"#999999\" stroke-width=\"0.5\"/>"
        );
    }

    /// Legend of all 17 states, placed right of `x`.
    fn legend(&mut self, x: f64, y: f64) {
        self.body.push_str("<g class=\"legend\">\n");
        for (k, s) in StateSymbol::all().into_iter().enumerate() {
            let yy = y + k as f64 * 16.0;
            let _ = writeln!(
                self.body,
                "<rect x=\"{x:.2}\" y=\"{yy:.2}\" width=\"12\" height=\"12\" fill=\"{}\" stroke=\"#333333\" stroke-width=\"0.5\"/>",
                state_color(s)
            );
            self.text(x + 18.0, yy + 10.0, "start", &s.to_string());
        }
        self.body.push_str("</g>\n");
        self.height = self.height.max(y + 17.0 * 16.0);
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <title>{t}</title>\n\
             <rect width=\"100%\" height=\"100%\" fill=\"#FFFFFF\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            t = escape(title),
            body = self.body
        )
    }
}

/// A row of a sequence index plot.
pub struct IndexRow<'a> {
    pub label: String,
    pub trajectory: &'a Trajectory,
}

/// One horizontal bar per release, each segment's width proportional to
/// its share of the release. `groups` inserts a labelled gap before the
/// row at each given index.
pub fn sequence_index_plot(title: &str, rows: &[IndexRow], groups: &[(usize, String)]) -> String {
    const LEFT: f64 = 110.0;
    const BAR_W: f64 = 600.0;
    const ROW_H: f64 = 12.0;
    const GROUP_GAP: f64 = 18.0;
    let top = 30.0;
    let height = top + rows.len() as f64 * ROW_H + groups.len() as f64 * GROUP_GAP + 20.0;
    let mut c = Canvas::new(LEFT + BAR_W + 20.0 + LEGEND_WIDTH, height);
    c.text(LEFT, 18.0, "start", title);
    let mut y = top;
    let mut next_group = groups.iter().peekable();
    for (i, row) in rows.iter().enumerate() {
        while let Some((_, name)) = next_group.next_if(|g| g.0 == i) {
            c.text(LEFT, y + 13.0, "start", name);
            y += GROUP_GAP;
        }
        c.text(LEFT - 6.0, y + ROW_H - 2.5, "end", &row.label);
        let t = row.trajectory;
        let (start, _) = t.span();
        let total = t.duration().max(1) as f64;
        for seg in t.segments() {
            let x = LEFT + (seg.start - start) as f64 / total * BAR_W;
            let w = seg.len() as f64 / total * BAR_W;
            c.rect(x, y, w, ROW_H - 1.0, state_color(seg.state), Some(&seg.state.to_string()));
        }
        c.frame(LEFT, y, BAR_W, ROW_H - 1.0);
        y += ROW_H;
    }
    c.legend(LEFT + BAR_W + 20.0, top);
    c.finish(title)
}

/// Heatmap of transition rates, darker for higher rates, with the rate
/// printed in each non-zero cell.
pub fn transition_heatmap(title: &str, tm: &TransitionMatrix) -> String {
    const LEFT: f64 = 60.0;
    const TOP: f64 = 60.0;
    const CELL: f64 = 34.0;
    let n = tm.alphabet.len();
    let grid = n as f64 * CELL;
    let mut c = Canvas::new(LEFT + grid + 30.0 + LEGEND_WIDTH, TOP + grid + 30.0);
    c.text(LEFT, 18.0, "start", title);
    c.text(LEFT + grid / 2.0, 36.0, "middle", "to");
    c.text(14.0, TOP + grid / 2.0, "middle", "from");
    for (j, s) in tm.alphabet.iter().enumerate() {
        c.text(LEFT + (j as f64 + 0.5) * CELL, TOP - 6.0, "middle", &s.to_string());
        c.text(LEFT - 6.0, TOP + (j as f64 + 0.5) * CELL + 4.0, "end", &s.to_string());
    }
    for i in 0..n {
        for j in 0..n {
            let r = tm.rates[i][j];
            let shade = (255.0 * (1.0 - r)).round().clamp(0.0, 255.0) as u8;
            let fill = format!("#{shade:02X}{shade:02X}FF");
            let (x, y) = (LEFT + j as f64 * CELL, TOP + i as f64 * CELL);
            let label = format!("{} -> {}: {:.3}", tm.alphabet[i], tm.alphabet[j], r);
            c.rect(x, y, CELL - 1.0, CELL - 1.0, &fill, Some(&label));
            if r > 0.0 {
                let ink = if r > 0.55 { "#FFFFFF" } else { "#000000" };
                c.text_colored(x + CELL / 2.0, y + CELL / 2.0 + 4.0, "middle", &format!("{r:.2}"), ink);
            }
        }
    }
    c.legend(LEFT + grid + 30.0, TOP);
    c.finish(title)
}

/// One bar per position, colored by the modal state, its height the
/// modal state's frequency.
pub fn modal_plot(title: &str, modal: &ModalTrajectory) -> String {
    const LEFT: f64 = 50.0;
    const TOP: f64 = 30.0;
    const PLOT_W: f64 = 600.0;
    const PLOT_H: f64 = 200.0;
    let n = modal.positions.len().max(1);
    let bar = PLOT_W / n as f64;
    let mut c = Canvas::new(LEFT + PLOT_W + 20.0 + LEGEND_WIDTH, TOP + PLOT_H + 40.0);
    c.text(LEFT, 18.0, "start", title);
    for tick in [0.0, 0.5, 1.0] {
        c.text(LEFT - 6.0, TOP + PLOT_H * (1.0 - tick) + 4.0, "end", &format!("{tick:.1}"));
    }
    let _ = writeln!(
        c.body,
        "<line x1=\"{LEFT}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"#333333\"/>",
        y = TOP + PLOT_H,
        x2 = LEFT + PLOT_W
    );
    for (p, pos) in modal.positions.iter().enumerate() {
        let h = pos.frequency * PLOT_H;
        let label = format!("position {}: {} ({:.3}, {}/{})", p + 1, pos.state, pos.frequency, pos.support, pos.denominator);
        c.rect(LEFT + p as f64 * bar, TOP + PLOT_H - h, bar, h, state_color(pos.state), Some(&label));
        c.frame(LEFT + p as f64 * bar, TOP + PLOT_H - h, bar, h);
    }
    c.text(LEFT + PLOT_W / 2.0, TOP + PLOT_H + 24.0, "middle", &format!("position (n = {})", modal.corpus_size));
    c.legend(LEFT + PLOT_W + 20.0, TOP);
    c.finish(title)
}
