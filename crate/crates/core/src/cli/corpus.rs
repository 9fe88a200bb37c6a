//! The shipped benchmark corpus. The FIR kernel is parameterizable in its
//! input width; the CLI re-instantiates the source per width.

/// 3-tap FIR kernel with shift-scaled taps: coefficient multiplies feed a
/// right-shifted accumulation chain. Merging the additions into one
/// carry-save cluster requires pre-shifting the addends, so the best
/// architecture flips as the data width grows past the shift overhead.
pub fn fir3_source(p: u32) -> String {
    let q = 6;
    format!(
        "module fir3(\n  \
           input [{xw}:0] x0,\n  input [{xw}:0] x1,\n  input [{xw}:0] x2,\n  \
           output [{yw}:0] y\n);\n  \
           wire [{mw}:0] m0;\n  wire [{mw}:0] m1;\n  wire [{mw}:0] m2;\n  \
           wire [{sw}:0] s1;\n  \
           assign m0 = (x0 << 1) + x0;\n  \
           assign m1 = x1 << 1;\n  \
           assign m2 = (x2 << 1) + x2;\n  \
           assign s1 = m1 + (m2 >> {q});\n  \
           assign y = m0 + (s1 >> {q});\nendmodule\n",
        xw = p - 1,
        mw = p + 1,
        sw = p + 2,
        yw = p + 3,
    )
}

pub const SHIFTED_FMA: &str = "\
module shifted_fma(
  input [7:0] a,
  input [7:0] b,
  input [7:0] c,
  output [15:0] y
);
  wire [15:0] p;
  wire [15:0] sh;
  assign p = b * c;
  assign sh = p >> 2;
  assign y = a + sh;
endmodule
";

pub const SHIFT_MULT: &str = "\
module shift_mult(
  input [7:0] a,
  input [7:0] b,
  input [2:0] s0,
  input [2:0] s1,
  input e,
  output [11:0] z
);
  wire [11:0] p;
  wire [11:0] n0;
  assign p = a * b;
  assign n0 = e ? (p >> s0) : (p >> s1);
  assign z = n0 >> s1;
endmodule
";

pub const ADPCM: &str = "\
module adpcm(
  input [15:0] step,
  input [2:0] delta,
  output [18:0] vpdiff
);
  wire [15:0] d2;
  wire [15:0] d1;
  wire [15:0] d0;
  wire [16:0] s0;
  wire [17:0] s1;
  assign d2 = delta[2] ? step : 16'd0;
  assign d1 = delta[1] ? (step >> 1) : 16'd0;
  assign d0 = delta[0] ? (step >> 2) : 16'd0;
  assign s0 = d2 + d1;
  assign s1 = s0 + d0;
  assign vpdiff = s1 + (step >> 3);
endmodule
";

pub const MCM_3_7_21: &str = "\
module mcm_3_7_21(
  input [7:0] x,
  output [9:0] y0,
  output [10:0] y1,
  output [12:0] y2
);
  assign y0 = 3 * x;
  assign y1 = 7 * x;
  assign y2 = 21 * x;
endmodule
";

pub const MCM_5_93: &str = "\
module mcm_5_93(
  input [7:0] x,
  output [10:0] y0,
  output [14:0] y1
);
  assign y0 = 5 * x;
  assign y1 = 93 * x;
endmodule
";

pub const MCM_7_19_31: &str = "\
module mcm_7_19_31(
  input [7:0] x,
  output [10:0] y0,
  output [12:0] y1,
  output [12:0] y2
);
  assign y0 = 7 * x;
  assign y1 = 19 * x;
  assign y2 = 31 * x;
endmodule
";

/// Corpus entries with their benchmark-specific run settings.
pub fn corpus() -> Vec<(&'static str, String)> {
    vec![
        ("fir3", fir3_source(8)),
        ("adpcm", ADPCM.to_string()),
        ("shifted_fma", SHIFTED_FMA.to_string()),
        ("shift_mult", SHIFT_MULT.to_string()),
        ("mcm_3_7_21", MCM_3_7_21.to_string()),
        ("mcm_5_93", MCM_5_93.to_string()),
        ("mcm_7_19_31", MCM_7_19_31.to_string()),
    ]
}

/// True for benchmarks that need the constant-multiplication rule set.
pub fn is_mcm(name: &str) -> bool {
    name.starts_with("mcm")
}
