import os
import sys

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")


def out_path(name):
    os.makedirs(OUT, exist_ok=True)
    return os.path.join(OUT, name)


def say(*args):
    print(*args, file=sys.stdout)
