import os

home = os.environ.get("HOME")
cwd = os.getcwd()
