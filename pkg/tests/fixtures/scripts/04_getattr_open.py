import os

fn = getattr(os, "getcwd")
fh = open("data.txt")
