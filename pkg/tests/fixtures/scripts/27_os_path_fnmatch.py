import fnmatch
import os.path

joined = os.path.join("a", "b")
names = fnmatch.filter(["a.txt"], "*.txt")
