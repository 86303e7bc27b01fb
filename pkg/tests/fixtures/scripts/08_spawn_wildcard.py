import os

os.spawnve(os.P_WAIT, "/bin/echo", ["echo"], {})
