from subprocess import *

check_output(["echo", "fixture"])
