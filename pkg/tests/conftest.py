import sys

# Unrolled recursive producers nest deeply; the AST walks are recursive.
sys.setrecursionlimit(100_000)
