"""Writes src/fontdata.rs: base-14 font metrics, the simple-font base
encodings and the Adobe glyph list.

Requires reportlab (AFM widths and encodings) and fontTools (glyph list).
Run from the crate root: python3 tools/gen_fontdata.py > src/fontdata.rs
"""
import re
import reportlab.pdfbase._fontdata as fd
from fontTools.agl import LEGACY_AGL2UV

out = []
w = out.append
w("// Generated by tools/gen_fontdata.py from reportlab's AFM tables and")
w("// fontTools' legacy Adobe glyph list. Do not edit by hand.")
w("")


def rs_str(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


for name in ["StandardEncoding", "WinAnsiEncoding", "MacRomanEncoding", "PDFDocEncoding",
             "SymbolEncoding", "ZapfDingbatsEncoding", "MacExpertEncoding"]:
    enc = fd.encodings[name]
    const = re.sub(r"(?<=[a-z])(?=[A-Z])", "_", name.replace("PDFDoc", "PdfDoc")).upper()
    w(f"pub static {const}: [&str; 256] = [")
    for i in range(0, 256, 8):
        w("    " + " ".join(rs_str(g or "") + "," for g in enc[i:i + 8]))
    w("];")
    w("")

fonts = sorted(fd.widthsByFontGlyph)
w("pub struct Base14 {")
w("    pub name: &'static str,")
w("    pub ascent: i16,")
w("    pub descent: i16,")
w("    /// (glyph name, width in 1/1000 em), sorted by name.")
w("    pub widths: &'static [(&'static str, u16)],")
w("}")
w("")
w("pub static BASE14: [Base14; %d] = [" % len(fonts))
for f in fonts:
    asc, desc = fd.ascent_descent[f]
    w("    Base14 {")
    w(f"        name: {rs_str(f)},")
    w(f"        ascent: {asc},")
    w(f"        descent: {desc},")
    w("        widths: &[")
    items = sorted(fd.widthsByFontGlyph[f].items())
    for i in range(0, len(items), 6):
        w("            " + " ".join(f"({rs_str(g)}, {v})," for g, v in items[i:i + 6]))
    w("        ],")
    w("    },")
w("];")
w("")

entries = sorted(LEGACY_AGL2UV.items())
w("/// Glyph name to Unicode, sorted by name.")
w("pub static GLYPH_LIST: [(&str, &str); %d] = [" % len(entries))
for g, uvs in entries:
    s = "".join("\\u{%X}" % u for u in uvs)
    w(f'    ({rs_str(g)}, "{s}"),')
w("];")
print("\n".join(out))
