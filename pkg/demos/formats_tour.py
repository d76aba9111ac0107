"""APX and TGF in and out: round trips and located parse diagnostics."""

from argengine import parse_apx, parse_tgf, serialize_apx, serialize_tgf, witness_framework
from argengine.formats import ParseError

W = witness_framework()

apx = serialize_apx(W)
print("canonical APX:")
print(apx)
print("round trip identical:", parse_apx(apx) == W)

tgf = serialize_tgf(W)
print("canonical TGF:")
print(tgf)
print("round trip identical:", parse_tgf(tgf) == W)

print("cross-format agreement:", parse_apx(apx) == parse_tgf(tgf))

# Errors are all-or-nothing, with line/column locations.
bad = """arg(a).
att(a,b).
argh(c).
"""
try:
    parse_apx(bad)
except ParseError as err:
    print("\ndiagnostics for malformed APX:")
    for diag in err.diagnostics:
        print(" ", diag)
