"""Run a subset of the verification suite and print the markdown report."""

import sys

from flowlab import verify as vf

only = sys.argv[1:] or ["1", "5", "6"]
reports = vf.run_suite(only)
print(vf.markdown_report([r.to_record() for r in reports]))
