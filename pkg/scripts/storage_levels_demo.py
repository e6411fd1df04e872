"""Five-level storage: which levels may release energy for a given content.

Prints, for each content value, the attainable indicator patterns found by
exhaustive enumeration, then shows the full-storage discharge with and
without end-of-interval anchoring.
"""

from resmilp import MilpModel, brute_force
from resmilp.instances import FIVE_LEVELS
from resmilp.storage import LevelSet, allocate_storage_vars, build_level_indicators, build_multilevel_storage


def indicator_pattern(content):
    row = []
    for n, _ in enumerate(FIVE_LEVELS):
        cells = []
        for name in ("y", "ybar"):
            m = MilpModel()
            sv = allocate_storage_vars(m, "s", LevelSet.from_fractions(FIVE_LEVELS, 1.0), [1.0])
            build_level_indicators(m, sv, time_discrete=True)
            for var in sv.content:
                m.fix(var, content)
            table = getattr(sv, name)
            if n not in table:
                cells.append("-")
                continue
            m.fix(table[n][0], 1.0)
            cells.append("1" if brute_force(m).optimal else "0")
        row.append("/".join(cells))
    return row


def full_discharge(time_discrete):
    m = MilpModel()
    sv = build_multilevel_storage(m, "s", LevelSet.from_fractions(FIVE_LEVELS, 10.0), [1.0],
                                  initial=10.0, time_discrete=time_discrete)
    top = max(sv.y)
    m.fix(sv.content[1], 0.0)
    for n in sv.outputs:
        if n != top:
            m.fix(sv.outputs[n][0], 0.0)
    return brute_force(m).status


if __name__ == "__main__":
    print("content  " + "  ".join(f"{f:>7}" for f in FIVE_LEVELS) + "   (y may be 1 / ybar may be 1)")
    for content in (0.0, 0.15, 0.3, 0.45, 0.75, 0.95, 1.0):
        print(f"{content:7.2f}  " + "  ".join(f"{c:>7}" for c in indicator_pattern(content)))
    print("empty a full store through the top level in one interval:")
    print("  anchored at interval start:", full_discharge(False))
    print("  anchored at interval end:  ", full_discharge(True))
