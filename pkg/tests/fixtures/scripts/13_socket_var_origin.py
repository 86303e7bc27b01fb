import socket

conn = socket.socket()
conn.connect(("192.0.2.10", 443))
