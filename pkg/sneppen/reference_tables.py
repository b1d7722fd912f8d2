"""已发表的系数表 α_{i,j,k}，k = 1..5

每张表由若干段组成：("row", i, j0, 值列表) 表示 α_{i,j0}, α_{i,j0+1}, …；
("col", j, i0, 值列表) 表示 α_{i0,j}, α_{i0+1,j}, …。未列出的条目为零。
"""

from fractions import Fraction
from typing import Dict, Tuple

from utils.serialization import parse_rational

Entry = Tuple[int, int]

_SEGMENTS = {
    1: [
        ("col", 0, 1, "1 -1 1/3"),
    ],
    2: [
        ("row", 1, 1, "1 -3/2 1 -1/4"),
        ("row", 2, 0, "3 -1/2 3/4 -1/2 1/8"),
        ("col", 0, 3, "-19/3 11/2 -9/4 3/8"),
    ],
    3: [
        ("row", 1, 1, "1/5 29/10 -25/3 121/12 -32/5 32/15 -32/105"),
        ("row", 2, 0, "2/5 9/10 -59/20 31/6 -127/24 16/5 -16/15 16/105"),
        ("row", 3, 0, "38/5 -5/3 5/2 -5/3 5/12"),
        ("row", 4, 0, "-523/20 1 -3/2 1 -1/4"),
        ("row", 5, 0, "75/2 -1/5 3/10 -1/5 1/20"),
        ("col", 0, 6, "-3551/120 477/35 -487/140 487/1260"),
    ],
    4: [
        ("row", 1, 1, "1/5 1/2 7 -1879/60 8507/150 -10421/180 4589/126 -227/16 143/45 -143/450"),
        ("row", 2, 0, "2/5 1/10 53/20 -71/6 3089/120 -10427/300 11189/360 -23329/1260 "
                      "227/32 -143/90 143/900"),
        ("row", 3, 0, "1 2/3 -19/3 134/9 -307/18 32/3 -32/9 32/63"),
        ("row", 4, 0, "1019/60 -51/20 281/40 -133/12 517/48 -32/5 32/15 -32/105"),
        ("row", 5, 0, "-2591/30 311/100 -1061/200 289/60 -673/240 32/25 -32/75 32/525"),
        ("row", 6, 0, "39877/225 -223/120 223/80 -223/120 223/480"),
        ("row", 7, 0, "-438271/2100 17/30 -17/20 17/30 -17/120"),
        ("row", 8, 0, "15035/96 -17/240 17/160 -17/240 17/960"),
        ("col", 0, 9, "-55459/720 1224179/50400 -113287/25200 113287/302400"),
    ],
    5: [
        ("row", 1, 1, "1/5 1/2 3/5 319/20 -4889/50 71923/300 -357143/1050 879181/2800 "
                      "-62029/315 53009/630 -12424/525 896/225 -896/2925"),
        ("row", 2, 0, "2/5 1/10 1/4 67/10 -943/24 31681/300 -319979/1800 1300879/6300 "
                      "-958631/5600 64031/630 -267047/6300 6212/525 -448/225 448/2925"),
        ("row", 3, 0, "1 -2/15 31/15 -20 1121/18 -9083/90 53257/540 -115301/1890 "
                      "1135/48 -143/27 143/270"),
        ("row", 4, 0, "47/60 13/20 -359/40 371/12 -14231/240 11147/150 -11477/180 "
                      "23473/630 -227/16 143/45 -143/450"),
        ("row", 5, 0, "5651/150 -321/100 2947/200 -629/20 46771/1200 -23627/750 16469/900 "
                      "-25969/3150 227/80 -143/225 143/2250"),
        ("row", 6, 0, "-37733/150 1199/200 -17927/1200 7867/360 -5855/288 892/75 "
                      "-892/225 892/1575"),
        ("row", 7, 0, "214099/315 -12527/2100 45197/4200 -13609/1260 36457/5040 -272/75 "
                      "272/225 -272/1575"),
        ("row", 8, 0, "-2253961/2100 9967/2800 -93511/16800 20987/5040 -32411/20160 "
                      "34/75 -34/225 34/1575"),
        ("row", 9, 0, "33882311/30240 -1957/1512 1957/1008 -1957/1512 1957/6048"),
        ("row", 10, 0, "-20505517/25200 289/1080 -289/720 289/1080 -289/4320"),
        ("row", 11, 0, "694474463/1663200 -289/11880 289/7920 -289/11880 289/47520"),
        ("col", 0, 12, "-497946013/3326400 55461661/1544400 -6257393/1201200 "
                       "6257393/18018000"),
    ],
}

PUBLISHED_K = tuple(sorted(_SEGMENTS))


def published_table(k: int) -> Dict[Entry, Fraction]:
    """第 k 张已发表系数表的非零条目"""
    if k not in _SEGMENTS:
        raise KeyError(f"没有 k={k} 的已发表系数表")
    entries: Dict[Entry, Fraction] = {}
    for kind, fixed, start, values in _SEGMENTS[k]:
        for offset, text in enumerate(values.split()):
            entry = (fixed, start + offset) if kind == "row" else (start + offset, fixed)
            value = parse_rational(text)
            if value != 0:
                entries[entry] = value
    return entries
