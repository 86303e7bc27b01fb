import os

os.system("echo fixture")
