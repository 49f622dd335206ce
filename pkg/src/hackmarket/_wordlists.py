# Category names and themed keyword pools for the synthetic corpus generator.
TAXONOMY = (
    "Carding", "PayPal-related", "Cashing Credit Cards", "PGP", "Netflix-related",
    "Hacking Tools - General", "Dumps - General", "Linux-related", "Email Hacking Tools",
    "Network Security Tools", "Ebay-related", "Amazon-related", "Bitcoin", "Links (Lists)",
    "Banking", "Point of Sale", "VPN", "Botnet", "Hacking Groups Invitation", "RATs",
    "Browser-related", "Physical Layer Hacking", "Password Cracking", "Smartphone - General",
    "Wireless Hacking", "Phishing", "Exploit Kits", "Viruses/Counter AntiVirus",
    "Network Layer Hacking", "RDP Servers", "Android-related", "Keyloggers",
    "Windows-related", "Facebook-related",
)

KEYWORDS = {
    "Carding": "carding cvv fullz bins cardable carder nonvbv skimmed autoshop chargeback bincheck cardholder",
    "PayPal-related": "paypal ppaccount stealthpp ppbalance pptransfer verifiedpp ppmethod limitbypass sendmoney ppcashout ppgiftcard ppchecker",
    "Cashing Credit Cards": "cashout cashing moneygram westernunion drops atm withdrawal dropaddress cashapp loadcard prepaid reshipping",
    "PGP": "pgp gpg encryption keypair publickey privatekey signing cipher kleopatra gnupg decrypt fingerprint",
    "Netflix-related": "netflix streaming hulu spotify premiumaccount uhd subscription lifetime screens disneyplus hbo crunchyroll",
    "Hacking Tools - General": "hacktool toolkit hacker hacking pentest kali metasploit payload sqlmap armitage burpsuite hackpack",
    "Dumps - General": "dumps track1 track2 pin dumpswithpin magstripe 101 201 encoder msr emv swipe",
    "Linux-related": "linux ubuntu debian kernel bash shell centos redhat distro terminal sudo privesc",
    "Email Hacking Tools": "email gmail yahoo hotmail inbox smtp mailer spammer leads emaillist bulkmail mailaccess",
    "Network Security Tools": "firewall ids nmap wireshark portscan sniffer netcat snort honeypot traffic packetcapture nessus",
    "Ebay-related": "ebay ebayaccount seller stealthebay feedback auction listings powerseller ebayfraud ebaymethod buyitnow ebayrefund",
    "Amazon-related": "amazon amazongiftcard prime aws kindle amazonrefund amzn amazonseller fba audible amazonaccount amazonmethod",
    "Bitcoin": "bitcoin btc wallet blockchain mixer tumbler satoshi electrum miner altcoin litecoin coinbase",
    "Links (Lists)": "links onionlinks linklist directory deepweb darknet hiddenwiki urls onion marketlist tordir sitelist",
    "Banking": "bank banklogin bankdrops chase wellsfargo boa barclays routing wiretransfer accountnumber ach onlinebanking",
    "Point of Sale": "pos pointofsale possystem posmalware dexter blackpos memoryscraper retail cashregister alina vskimmer jackpos",
    "VPN": "vpn openvpn socks5 proxies nordvpn anonymity ip tunneling expressvpn hidemyass ipvanish privatevpn",
    "Botnet": "botnet bots zeus ddos cnc loader mirai bothost booter stresser zombies ircbot",
    "Hacking Groups Invitation": "invitation membership forum crew squad vipaccess join community collective hackforum clan brotherhood",
    "RATs": "rat darkcomet njrat remoteaccess blackshades poisonivy cybergate nanocore xtremerat remotecontrol spynote quasar",
    "Browser-related": "browser chrome firefox cookies browserhijack extension plugin useragent sessionhijack antidetect iexplorer opera",
    "Physical Layer Hacking": "lockpick rfid skimmer badusb rubberducky keycard cloner hardware nfc teensy arduino magspoof",
    "Password Cracking": "password crack cracker bruteforce wordlist hashcat johntheripper hydra rainbow dictionary hash combolist",
    "Smartphone - General": "smartphone iphone mobile imei unlock icloud sim samsung simswap phone carrier jailbreak",
    "Wireless Hacking": "wifi wireless wpa wpa2 wep aircrack handshake antenna alfa reaver deauth hotspot",
    "Phishing": "phishing scampage phishpage lure spoof fakepage landing credentials phishkit smishing clone template",
    "Exploit Kits": "exploit exploitkit zeroday angler blackhole nuclear rig cve vulnerability shellcode driveby magnitude",
    "Viruses/Counter AntiVirus": "virus antivirus crypter fud undetectable malware worm ransomware trojan binder obfuscator avbypass",
    "Network Layer Hacking": "mitm arp dns tcp packet sniffing hijack dnspoison syn flood bgp icmp",
    "RDP Servers": "rdp vps remotedesktop server dedicated hosting rootaccess admin adminrdp bulletproof cpanel whm",
    "Android-related": "android apk playstore droid root xposed androidspy apkmod lollipop marshmallow kitkat spyapp",
    "Keyloggers": "keylogger keylog keystroke logger ardamax spyware monitoring stealer refog hawkeye keyscrambler recorder",
    "Windows-related": "windows win7 win10 xp activation microsoft office productkey serialkey license winrar regedit",
    "Facebook-related": "facebook fb fbaccount likes followers fanpage messenger instagram socialmedia fbhack profile friends",
}

NOISE = (
    "new best cheap fast premium guaranteed instant quality tested working updated legit "
    "reliable trusted bonus discount sale delivery worldwide 2016 easy full valid fresh"
).split()
