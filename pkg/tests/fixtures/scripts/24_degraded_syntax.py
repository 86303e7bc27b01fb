import os
os.system("echo broken"
