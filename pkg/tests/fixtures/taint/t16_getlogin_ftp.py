import ftplib
import os

who = os.getlogin()
session = ftplib.FTP("ftp.example.invalid")
session.storbinary("STOR who.txt", who)
