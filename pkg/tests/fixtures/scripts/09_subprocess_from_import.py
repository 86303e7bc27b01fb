from subprocess import run

run(["echo", "fixture"])
