"""
Energy overlay as SVG
=====================

Writes the report and one picture per energy field. Circle area is
proportional to the normalized element energy; sound elements are omitted.
"""

import sys
from pathlib import Path

from msa import emit_svg, parse_model, run_stability_analysis, write_report
from msa.report import svg_filename

here = Path(__file__).parent
out = Path(sys.argv[1]) if len(sys.argv) > 1 else here / "out"
out.mkdir(exist_ok=True)

model = parse_model((here / "portal_frame.json").read_text())
report = run_stability_analysis(model, n_s=4, n_l=1)
write_report(report, out / "report.json")

for field in report.fields:
    path = out / svg_filename(field)
    emit_svg(model, field, path)
    print(path, "suspects:", field.suspects)

# same thing from the shell:
#   msa analyze demos/portal_frame.json --ns 4 --nl 1 --out out/report.json --svg-dir out
